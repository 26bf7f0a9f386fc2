"""
System parameters
Physical parameters of the ground-truth systems. All values are SI units.
"""

import math

from pydantic import BaseModel, ConfigDict, Field


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SpringMassParams(_Params):
    """Mass on a linear spring"""

    mass: float = Field(1.0, gt=0, description="m (kg)")
    spring_constant: float = Field(80.0, gt=0, description="k (N/m)")


class PendulumParams(_Params):
    """Uniform rod pivoting at one end"""

    mass: float = Field(1.0, gt=0, description="m (kg)")
    length: float = Field(0.5, gt=0, description="L (m)")
    gravity: float = Field(9.81, gt=0, description="g (m/s^2)")


class DoublePendulumParams(_Params):
    """Two rectangular rods chained at a hinge; desk-scale defaults"""

    m1: float = Field(1.0, gt=0)
    m2: float = Field(1.0, gt=0)
    l1: float = Field(0.205, gt=0)
    l2: float = Field(0.179, gt=0)
    w1: float = Field(0.038, gt=0)
    w2: float = Field(0.038, gt=0)
    gravity: float = Field(9.81, gt=0)

    @property
    def inertia1(self) -> float:
        return self.m1 * (self.l1 ** 2 + self.w1 ** 2) / 12.0

    @property
    def inertia2(self) -> float:
        return self.m2 * (self.l2 ** 2 + self.w2 ** 2) / 12.0


class HopfParams(_Params):
    """Hopf normal form with a decaying third coordinate"""

    mu: float = Field(0.25, description="Bifurcation parameter")
    omega: float = Field(2.0 * math.pi, description="Angular rate (rad/s)")
    stiffness: float = Field(1.0, gt=0, description="Radial stiffness a")
