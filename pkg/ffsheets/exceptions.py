#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

"""
Error hierarchy of ffsheets.

Every error derives from :class:`FFSheetsError` and from the closest builtin exception, so callers
may catch either. Errors carry the data needed to react (pivot index, offending point, field path).
"""


class FFSheetsError(Exception):
    """Base class of all ffsheets errors."""


class DomainError(FFSheetsError, ValueError):
    """An argument lies outside the domain where it is defined (holomorphy region, sheet, ...)."""
    def __init__(self, argument, value, message=None):
        self.argument = argument
        self.value = value
        super().__init__(message or f"Argument '{argument}' out of domain: {value!r}")


class DegenerateArcError(FFSheetsError, ValueError):
    """The parametrization of an arc produced non-finite values."""
    def __init__(self, parameter):
        self.parameter = parameter
        super().__init__(f"Non-finite arc parametrization at t={parameter!r}")


class BoundaryAmbiguousError(FFSheetsError, ValueError):
    """A point is closer to a contour or to the real interval than the boundary standoff."""
    def __init__(self, z, distance, standoff):
        self.z = z
        self.distance = distance
        self.standoff = standoff
        super().__init__(f"Point {z} is {distance:.3g} away from the boundary "
                         f"(standoff {standoff:.3g}).")


class SingularMatrixError(FFSheetsError, ZeroDivisionError):
    def __init__(self, pivot):
        self.pivot = pivot
        super().__init__(f"Matrix is exactly singular (zero pivot at index {pivot}).")


class ConvergenceError(FFSheetsError, ArithmeticError):
    def __init__(self, message, iterations=None):
        self.iterations = iterations
        super().__init__(message)


class RepositionBoxError(FFSheetsError, ArithmeticError):
    """The function nearly vanishes on a box boundary; the box has to be shifted or shrunk."""
    def __init__(self, box, minimum):
        self.box = box
        self.minimum = minimum
        super().__init__(f"|f| = {minimum:.3g} on the boundary of {box}.")


class StagnationError(FFSheetsError, ArithmeticError):
    def __init__(self, z, derivative):
        self.z = z
        self.derivative = derivative
        super().__init__(f"Newton iteration stagnates at {z} (|f'| = {abs(derivative):.3g}).")


class EscapedError(FFSheetsError, ArithmeticError):
    def __init__(self, z):
        self.z = z
        super().__init__(f"Newton iteration left the search region at {z}.")


class SpectralPointError(FFSheetsError, ArithmeticError):
    """The Lippmann-Schwinger system is singular: z is (close to) a bound state or resonance."""
    def __init__(self, z, condition):
        self.z = z
        self.condition = condition
        super().__init__(f"Singular Lippmann-Schwinger system at z={z} "
                         f"(condition {condition:.3g}).")


class AtResonanceError(FFSheetsError, ArithmeticError):
    """The scattering matrix cannot be inverted at z, i.e. z is (close to) a resonance."""
    def __init__(self, z, sheet, condition):
        self.z = z
        self.sheet = sheet
        self.condition = condition
        super().__init__(f"S_{sheet:+d}(z) is not invertible at z={z} (condition {condition:.3g}).")


class ContourContaminatedError(FFSheetsError, ArithmeticError):
    def __init__(self, radius, deviation):
        self.radius = radius
        self.deviation = deviation
        super().__init__(f"Residue on circle of radius {radius:.3g} changes by {deviation:.3g} "
                         f"when the radius is halved. Another singularity is nearby.")


class IncompleteSearchError(FFSheetsError, RuntimeError):
    """
    The number of refined zeros does not match the winding number of the search region.

    found holds what was located so far: the zero search, a resonance list or resonance lists
    keyed by detector.
    """
    def __init__(self, unresolved, found, expected):
        self.unresolved = unresolved
        self.found = found
        self.expected = expected
        if isinstance(found, dict):
            count = sum(len(v) for v in found.values())
        else:
            count = len(getattr(found, "zeros", found))
        super().__init__(f"Found {count} zeros, winding number predicts {expected}. "
                         f"Unresolved boxes: {unresolved}")


class OracleUnavailableError(FFSheetsError, NotImplementedError):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(f"Closed-form oracle unavailable: {reason}")


class ConfigError(FFSheetsError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
