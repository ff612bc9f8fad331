from otcells.errors import ScenarioSyntaxError


class LexException(ScenarioSyntaxError):
    @classmethod
    def from_place(cls, message, place, filename=None, source=None):
        line, column = place
        return cls(message, None, filename, source, line, column)


class PrematureEndOfInput(LexException):
    pass
