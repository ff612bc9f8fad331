"""Values read from a scenario file.

Each model behaves like the builtin it wraps (`Integer` is an `int`, `List`
a `tuple`, …) and additionally remembers where in the file it came from,
so that validation errors can point at the offending entry.
"""


class Object:
    "An abstract base class for scenario models."

    """
    The position properties (`start_line`, `start_column`) are 1-based.
    """

    properties = ["_start_line", "_start_column"]

    def replace(self, other):
        "Copy the position of `other` onto `self` where `self` has none."
        if isinstance(other, Object):
            for attr in self.properties:
                if not hasattr(self, attr) and hasattr(other, attr):
                    setattr(self, attr, getattr(other, attr))
        else:
            raise TypeError(
                "Can't take a position from a non-model {!r}".format(other)
            )
        return self

    def at(self, line, column):
        self.start_line, self.start_column = line, column
        return self

    @property
    def start_line(self):
        return getattr(self, "_start_line", 1)

    @start_line.setter
    def start_line(self, value):
        self._start_line = value

    @property
    def start_column(self):
        return getattr(self, "_start_column", 1)

    @start_column.setter
    def start_column(self, value):
        self._start_column = value

    def __repr__(self):
        return f"{self.__class__.__name__}({super(Object, self).__repr__()})"

    def __eq__(self, other):
        # Models equal their plain value, but `Word("x") != String("x")`.
        if isinstance(other, Object) and type(self) is not type(other):
            return False
        return super().__eq__(other)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return super().__hash__()


class Integer(Object, int):
    "A literal integer."


class Float(Object, float):
    "A literal floating-point number."


class String(Object, str):
    "A double-quoted string."


class Word(Object, str):
    "A bare word, e.g. `uniform` or `round-robin`."


class Key(Object, str):
    "A (possibly dotted) key, e.g. `station.1.position`."

    @property
    def parts(self):
        return self.split(".")


class List(Object, tuple):
    "A bracketed list of values. Lists nest."

    def __repr__(self):
        return "List([{}])".format(", ".join(map(repr, self)))


class Section:
    "A `[name]` header."

    def __init__(self, name):
        self.name = name

    @property
    def start_line(self):
        return self.name.start_line

    @property
    def start_column(self):
        return self.name.start_column

    def __repr__(self):
        return f"Section({self.name!r})"


class Entry:
    "A `key = value` line, with `key` already joined to its section."

    def __init__(self, key, value):
        self.key = key
        self.value = value

    @property
    def start_line(self):
        return self.key.start_line

    @property
    def start_column(self):
        return self.key.start_column

    def __repr__(self):
        return f"Entry({self.key!r}, {self.value!r})"


def is_number(x):
    return isinstance(x, (Integer, Float))


def plain(x):
    "Strip the models from `x`, recursively."
    if isinstance(x, List):
        return tuple(plain(v) for v in x)
    for model, builtin in ((Integer, int), (Float, float), (Key, str), (Word, str), (String, str)):
        if isinstance(x, model):
            return builtin(x)
    return x
