"""Exception hierarchy shared by every sgk module.

Each error carries the process exit code the CLI reports for it, so the
command-line front end can map failures without a lookup table of its own.
"""

from __future__ import annotations

from typing import Optional, Sequence


EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_ADIABATICITY = 4
EXIT_INTERNAL = 5


class SpinGaugeError(Exception):
    """Base class. `step` is set when the failure happened inside an integration."""

    exit_code: int = EXIT_INTERNAL

    def __init__(self, message: str, *, step: Optional[int] = None) -> None:
        super().__init__(message)
        self.message = message
        self.step = step

    def with_step(self, step: int) -> "SpinGaugeError":
        self.step = step
        return self

    def payload(self) -> dict:
        data = {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
        }
        if self.step is not None:
            data["step"] = self.step
        return data

    def __str__(self) -> str:
        if self.step is None:
            return self.message
        return f"step {self.step}: {self.message}"


class PhysicsError(SpinGaugeError):
    exit_code = EXIT_PHYSICS


class DegeneracyError(PhysicsError):
    """Two band energies closer than the degeneracy tolerance."""


class SingularityError(PhysicsError):
    """Monopole-type field evaluated at its source (|H1| = 0, B = 0, p = 0)."""


class GaugePatchError(PhysicsError):
    """Analytic gauge patch requested on its own Dirac string."""


class BandTrackingError(PhysicsError):
    """Eigenvector overlap between neighbouring path points fell below 0.5."""


class SingularSystemError(PhysicsError):
    """Velocity matrix of the equations of motion cannot be inverted."""


class QuadratureError(PhysicsError):
    """Sphere flux differs between the two control radii."""


class EnsembleFailure(PhysicsError):
    """Too many trajectories of an ensemble failed."""

    def __init__(self, message: str, failures: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.failures = list(failures)


class NumericalError(SpinGaugeError):
    exit_code = EXIT_INTERNAL


class StepError(SpinGaugeError, ValueError):
    exit_code = EXIT_CONFIG


class AdiabaticityBreach(SpinGaugeError):
    exit_code = EXIT_ADIABATICITY


class SchemaError(SpinGaugeError):
    exit_code = EXIT_CONFIG

    def __init__(self, violations: Sequence[str]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid configuration")

    def payload(self) -> dict:
        data = super().payload()
        data["violations"] = self.violations
        return data


class PerturbationWarning(UserWarning):
    """Spin force is not small compared with the zeroth-order forces."""


class ConstraintDriftWarning(UserWarning):
    """A ray left its dispersion surface by more than the allowed drift."""


def check_step(step: float) -> float:
    if not step > 0.0:
        raise StepError(f"finite-difference step must be positive, got {step!r}")
    return float(step)
