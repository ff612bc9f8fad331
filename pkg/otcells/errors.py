import os
import re
import sys
import traceback
import importlib.util
from contextlib import contextmanager

from otcells import _initialize_env_var

_otcells_filter_internal_errors = _initialize_env_var(
    "OTCELLS_FILTER_INTERNAL_ERRORS", True
)


class OTCellsError(Exception):
    pass


class OTCellsInternalError(OTCellsError):
    """Unexpected errors occurring inside a solver or the scenario machinery.

    Errors sub-classing this are not intended to be user-facing, and will,
    hopefully, never be seen by users!
    """


class OTCellsUserError(OTCellsError):
    """Errors caused by invalid input: a bad domain, a bad station layout, a
    bad scenario file.

    This, and any errors inheriting from this, are user-facing.
    """


class DomainError(OTCellsUserError, ValueError):
    """Invalid domain, region or density field."""


class StationError(OTCellsUserError, ValueError):
    """Invalid station layout or radio parameters."""


class PowerOverflowError(OTCellsUserError, OverflowError):
    """The round-robin power requirement 2^(Nᵢθ̄) would overflow."""

    def __init__(self, message, station=None, exponent=None):
        super().__init__(message)
        self.station = station
        self.exponent = exponent


class UnsupportedParameterError(OTCellsUserError, ValueError):
    """A parameter value the solvers deliberately don't handle."""


class InstanceTooLargeError(OTCellsUserError, ValueError):
    """The brute-force oracle was asked to search a family it can't enumerate."""


class EquilibriumError(OTCellsUserError):
    """Equilibrium selection or comparison on an unusable input."""


class ConvergenceWarning(RuntimeWarning):
    """A fixed-point iteration stopped at `max_iter` without meeting `tol`."""


class ScenarioError(OTCellsUserError):
    """Errors caused by an invalid scenario file.

    Carries the position of the offending entry so the message can show the
    scenario line with a caret under it.
    """

    def __init__(
        self,
        message,
        entry=None,
        filename=None,
        source=None,
        lineno=1,
        colno=1,
    ):
        """
        Args:
            message (str): The message to display for this error.
            entry (Optional[Object]): The scenario model generating this error.
                Its position takes precedence over `lineno` and `colno`.
            filename (Optional[str]): The scenario file name. Defaults to `None`.
            source (Optional[str]): The scenario text. Defaults to `None`.
            lineno (int): The line number of the error. Defaults to `1`.
            colno (int): The column number of the error. Defaults to `1`.
        """
        self.msg = message
        self.compute_lineinfo(entry, filename, source, lineno, colno)

        if isinstance(self, SyntaxError):
            syntax_error_args = (self.filename, self.lineno, self.offset, self.text)
            super().__init__(message, syntax_error_args)
        else:
            super().__init__(message)

    def compute_lineinfo(self, entry, filename, source, lineno, colno):

        # NOTE: We use `SyntaxError`'s field names (i.e. `text`, `offset`,
        # `msg`) for compatibility and print-outs.
        self.filename = filename
        self.lineno = getattr(entry, "start_line", lineno)
        self.offset = getattr(entry, "start_column", colno)

        if source:
            lines = source.splitlines()
            if 0 < self.lineno <= len(lines):
                self.text = lines[self.lineno - 1]
            else:
                self.text = None
        else:
            self.text = None

    def __str__(self):
        """Provide an exception message that includes SyntaxError-like source
        line information when available.
        """
        if isinstance(self, SyntaxError):
            return super().__str__()
        elif not self.text:
            if self.filename:
                return f"{self.filename}, line {self.lineno}: {self.msg}"
            return super().__str__()

        # Re-purpose Python's builtin syntax error formatting.
        output = traceback.format_exception_only(
            SyntaxError,
            SyntaxError(self.msg, (self.filename, self.lineno, self.offset, self.text)),
        )

        msg_idx, _ = next(
            (i, x) for i, x in enumerate(output) if x.startswith("SyntaxError: ")
        )
        # Get rid of erroneous error-type label.
        output[msg_idx] = re.sub("^SyntaxError: ", "", output[msg_idx])

        # This resulting string will come after a "<class-name>:" prompt, so
        # put it down a line.
        output.insert(0, "\n")

        return "".join(output)


class ScenarioSyntaxError(ScenarioError, SyntaxError):
    """Error while lexing or parsing a scenario file."""


class ScenarioValidationError(ScenarioError):
    """Semantic violations in a parsed scenario.

    All violations are collected before raising; they are available as
    `errors`, each a `ScenarioError` positioned at its entry.
    """

    def __init__(self, errors, filename=None):
        self.errors = list(errors)
        super().__init__(
            "{} invalid scenario entr{}".format(
                len(self.errors), "y" if len(self.errors) == 1 else "ies"
            ),
            filename=filename,
        )

    def __str__(self):
        lines = [f"{self.msg}:"]
        for e in self.errors:
            lines.append(f"  line {e.lineno}: {e.msg}")
        return "\n".join(lines)


def _module_filter_name(module_name):
    try:
        spec = importlib.util.find_spec(module_name)
        if not spec:
            return None

        loader = spec.loader
        if not loader:
            return None

        filename = loader.get_filename(module_name)
        if not filename:
            return None

        if loader.is_package(module_name):
            # Use the package directory (e.g. instead of `.../__init__.py`) so
            # that we can filter all modules in a package.
            return os.path.dirname(filename)
        else:
            # Normalize filename endings, because tracebacks will use `pyc` when
            # the loader says `py`.
            return filename.replace(".pyc", ".py")
    except Exception:
        return None


_tb_hidden_modules = {
    m
    for m in map(
        _module_filter_name,
        [
            "otcells.cmdline",
            "otcells.experiments",
            "otcells.scenario",
            "otcells.solvers",
            "otcells.policies",
            "otcells.wardrop",
        ],
    )
    if m is not None
}


def otcells_exc_filter(exc_type, exc_value, exc_traceback):
    """Produce exceptions print-outs with all frames originating from the
    modules in `_tb_hidden_modules` filtered out.

    This does not remove the frames from the actual tracebacks, so debugging
    will show everything.
    """
    # frame = (filename, line number, function name*, text)
    new_tb = []
    for frame in traceback.extract_tb(exc_traceback):
        if not (
            frame[0].replace(".pyc", ".py") in _tb_hidden_modules
            or os.path.dirname(frame[0]) in _tb_hidden_modules
        ):
            new_tb += [frame]

    lines = traceback.format_list(new_tb)
    if lines:
        lines.insert(0, "Traceback (most recent call last):\n")

    lines.extend(traceback.format_exception_only(exc_type, exc_value))
    return "".join(lines)


def otcells_exc_handler(exc_type, exc_value, exc_traceback):
    """A `sys.excepthook` handler that uses `otcells_exc_filter` to
    remove internal frames from a traceback print-out.
    """
    if _initialize_env_var("OTCELLS_DEBUG", False):
        return sys.__excepthook__(exc_type, exc_value, exc_traceback)

    try:
        output = otcells_exc_filter(exc_type, exc_value, exc_traceback)
        sys.stderr.write(output)
        sys.stderr.flush()
    except Exception:
        sys.__excepthook__(exc_type, exc_value, exc_traceback)


@contextmanager
def filtered_exceptions():
    """Temporarily apply a `sys.excepthook` that filters internal frames
    from tracebacks.

    Filtering can be controlled by the variable
    `otcells.errors._otcells_filter_internal_errors` and environment variable
    `OTCELLS_FILTER_INTERNAL_ERRORS`.
    """
    global _otcells_filter_internal_errors
    if _otcells_filter_internal_errors:
        current_hook = sys.excepthook
        sys.excepthook = otcells_exc_handler
        try:
            yield
        finally:
            sys.excepthook = current_hook
    else:
        yield
