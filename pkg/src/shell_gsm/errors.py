"""
Exception hierarchy for shell-gsm.

Every error raised on purpose by the package derives from ShellGSMError and
also from the closest builtin (ValueError for bad input, ArithmeticError for
numerical breakdown), so callers may catch either.
"""

from typing import Optional


class ShellGSMError(Exception):
    """Base class for all shell-gsm errors"""


class DomainError(ShellGSMError, ValueError):
    """Argument outside the domain of a function or operation"""


class GeometryError(ShellGSMError, ValueError):
    """Invalid shell geometry or radius outside the shell"""

    def __init__(self, diagnostic: str):
        super().__init__(diagnostic)
        self.diagnostic = diagnostic


class DegenerateModeError(ShellGSMError, ArithmeticError):
    """A mode whose boundary data or operator denominator vanishes"""

    def __init__(
        self,
        message: str,
        family: Optional[str] = None,
        l: Optional[int] = None,
        segment: Optional[int] = None,
    ):
        self.reason = message
        self.family = family
        self.l = l
        self.segment = segment
        parts = [message]
        if family is not None:
            parts.append(f"family={family}")
        if l is not None:
            parts.append(f"l={l}")
        if segment is not None:
            parts.append(f"segment={segment}")
        super().__init__(", ".join(parts))


class StiffnessError(ShellGSMError, ArithmeticError):
    """Radial integrator could not advance"""

    def __init__(self, message: str, radius: float, segment: Optional[int] = None):
        self.reason = message
        self.radius = radius
        self.segment = segment
        where = f" at r={radius:.9g} m"
        if segment is not None:
            where += f" in segment {segment}"
        super().__init__(message + where)


class CompositionError(ShellGSMError, ArithmeticError):
    """Antenna/shell composition failed (singular or ill-conditioned M)"""

    def __init__(self, message: str, frequency: float):
        self.frequency = frequency
        super().__init__(f"{message} at {frequency / 1e9:.6g} GHz")


class GSMFormatError(ShellGSMError, ValueError):
    """Malformed GSM interchange file"""

    def __init__(self, message: str, block: Optional[str] = None):
        self.block = block
        super().__init__(f"{message} (block: {block})" if block else message)


class ConfigError(ShellGSMError, ValueError):
    """Scenario configuration error"""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        key: Optional[str] = None,
    ):
        self.line = line
        self.column = column
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if key:
            where.append(f"key '{key}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ExpressionError(ConfigError):
    """Profile expression failed to parse or evaluate"""

    def __init__(
        self,
        message: str,
        column: Optional[int] = None,
        r: Optional[float] = None,
    ):
        self.r = r
        if r is not None:
            message = f"{message} at r={r:.9g} m"
        super().__init__(message, column=column)
