"""
Three-wheel omni-directional drive: inverse/forward kinematics, a
proportional heading controller and a kinematic plant.

Wheel ``i`` sits at mounting angle ``theta_i`` (measured from the body +x
axis, counterclockwise) at ``body_radius`` from the centre and rolls
tangentially, so its surface speed is::

    v_i = -sin(theta_i) vx + cos(theta_i) vy + body_radius * omega
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, SingularGeometryError

DEFAULT_WHEEL_ANGLES = (90.0, 210.0, 330.0)

DEFAULT_GAIN = 2.0  # 1/s
DEFAULT_MAX_OMEGA = 1.5  # rad/s
DEFAULT_FORWARD_SPEED = 0.3  # m/s
DEFAULT_DEADBAND = math.radians(5.0)


@dataclass(frozen=True)
class DriveGeometry:
    wheel_angles: tuple[float, float, float] = DEFAULT_WHEEL_ANGLES
    wheel_radius: float = 0.05
    body_radius: float = 0.2

    def __post_init__(self):
        angles = tuple(float(a) for a in self.wheel_angles)
        if len(angles) != 3 or not all(math.isfinite(a) for a in angles):
            raise InvalidArgumentError("wheel_angles must be three finite angles in degrees")
        if not (self.wheel_radius > 0 and self.body_radius > 0):
            raise InvalidArgumentError("wheel_radius and body_radius must be positive")
        object.__setattr__(self, "wheel_angles", angles)

    @property
    def matrix(self) -> np.ndarray:
        """(3, 3) map from ``(vx, vy, omega)`` to wheel surface speeds."""
        th = np.radians(self.wheel_angles)
        return np.column_stack([-np.sin(th), np.cos(th), np.full(3, self.body_radius)])


@dataclass(frozen=True)
class BodyTwist:
    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.omega])


@dataclass(frozen=True)
class WheelSpeeds:
    speeds: tuple[float, float, float]

    def as_array(self) -> np.ndarray:
        return np.array(self.speeds, dtype=float)

    def angular(self, geom: DriveGeometry) -> np.ndarray:
        """Wheel spin rates in rad/s."""
        return self.as_array() / geom.wheel_radius


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


def wrap_angle(angle: float) -> float:
    """Wrap radians to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def inverse_kinematics(twist: BodyTwist, geom: DriveGeometry = DriveGeometry()) -> WheelSpeeds:
    th = np.radians(geom.wheel_angles)
    v = -np.sin(th) * twist.vx + np.cos(th) * twist.vy + geom.body_radius * twist.omega
    return WheelSpeeds(tuple(float(s) for s in v))


def forward_kinematics(wheels: WheelSpeeds, geom: DriveGeometry = DriveGeometry()) -> BodyTwist:
    """Body twist producing the given wheel speeds.

    Raises SingularGeometryError when two wheels share a mounting direction.
    """
    A = geom.matrix
    if np.linalg.cond(A) > 1e12:
        raise SingularGeometryError(f"wheel angles {geom.wheel_angles} give a singular kinematic matrix")
    vx, vy, omega = np.linalg.solve(A, wheels.as_array())
    return BodyTwist(float(vx), float(vy), float(omega))


def heading_controller(
    azimuth_error: float,
    gain: float = DEFAULT_GAIN,
    max_omega: float = DEFAULT_MAX_OMEGA,
    forward_speed: float = DEFAULT_FORWARD_SPEED,
    deadband: float = DEFAULT_DEADBAND,
) -> BodyTwist:
    """Turn toward the target; drive forward only once within the deadband."""
    if min(gain, max_omega, forward_speed) < 0:
        raise InvalidArgumentError("gain, max_omega and forward_speed must be >= 0")
    omega = max(-max_omega, min(max_omega, gain * azimuth_error))
    vx = forward_speed if abs(azimuth_error) < deadband else 0.0
    return BodyTwist(vx, 0.0, omega)


def step(state: VehicleState, twist: BodyTwist, dt: float) -> VehicleState:
    """Explicit Euler step; body-frame velocity is rotated by the current heading."""
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    c, s = math.cos(state.heading), math.sin(state.heading)
    return VehicleState(
        state.x + (c * twist.vx - s * twist.vy) * dt,
        state.y + (s * twist.vx + c * twist.vy) * dt,
        state.heading + twist.omega * dt,
    )
