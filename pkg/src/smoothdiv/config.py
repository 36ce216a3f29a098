"""Numerical tolerances.

The module-level :data:`TOL` instance is read at call time by every routine,
so ``with tolerances(psd=1e-8): ...`` temporarily overrides a value.
"""
import contextlib
import dataclasses


@dataclasses.dataclass
class Tolerances:
    herm: float = 1e-12
    psd: float = 1e-10
    trace: float = 1e-10
    support: float = 1e-10
    lambda_rtol: float = 1e-10
    orthogonal: float = 1e-14
    slack: float = 1e-6


TOL = Tolerances()


@contextlib.contextmanager
def tolerances(**overrides):
    """Temporarily override fields of :data:`TOL`."""
    old = dataclasses.asdict(TOL)
    try:
        for key, val in overrides.items():
            if not hasattr(TOL, key):
                raise AttributeError(f"unknown tolerance {key!r}")
            setattr(TOL, key, float(val))
        yield TOL
    finally:
        for key, val in old.items():
            setattr(TOL, key, val)
