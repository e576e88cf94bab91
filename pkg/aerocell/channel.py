"""
Air-to-ground channel: probabilistic line-of-sight model and mean path loss.

Every function accepts scalars or numpy arrays and broadcasts.

```python
from aerocell.channel import ChannelParams, is_covered

params = ChannelParams.calibrated(50.0, h=100.0)
is_covered((30, 20), (0, 0), params)   # True, L1 distance is exactly 50
```
"""
import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .exceptions import AeroCellValidationException


logger = logging.getLogger('aerocell.channel')

SPEED_OF_LIGHT = 299792458.0


class Norm(str, enum.Enum):
    L1 = 'L1'
    L2 = 'L2'


@dataclass(frozen=True)
class ChannelParams:
    a: float = 9.61
    b: float = 0.16
    eta_los: float = 1.0
    eta_nlos: float = 20.0
    fc: float = 2e9
    h: float = 100.0
    pl_threshold: float = None
    horizontal_norm: Norm = Norm.L1

    def __post_init__(self):
        object.__setattr__(self, 'horizontal_norm', as_norm(self.horizontal_norm))
        for name in ('a', 'b', 'fc', 'h'):
            if not getattr(self, name) > 0:
                raise AeroCellValidationException(
                    'Channel parameter {0} must be positive, got {1}'.format(
                        name, getattr(self, name)))
        if not self.eta_nlos >= self.eta_los >= 0:
            raise AeroCellValidationException(
                'Expected eta_nlos >= eta_los >= 0, got {0} and {1}'.format(
                    self.eta_nlos, self.eta_los))

    @classmethod
    def calibrated(cls, radius, **kwargs):
        """
        Parameters whose path-loss threshold puts the coverage boundary at
        horizontal distance `radius`.
        """
        params = cls(**kwargs)
        return replace(params, pl_threshold=float(path_loss(radius, params)))

    def to_dict(self):
        return {
            'a': self.a,
            'b': self.b,
            'eta_los': self.eta_los,
            'eta_nlos': self.eta_nlos,
            'fc': self.fc,
            'h': self.h,
            'pl_threshold': self.pl_threshold,
            'horizontal_norm': self.horizontal_norm.value,
        }


def as_norm(value):
    try:
        return Norm(value)
    except ValueError:
        raise AeroCellValidationException('Unknown norm: {0}'.format(value))


def elevation_angle(h, r):
    """Elevation angle in radians; pi/2 directly overhead."""
    if np.any(np.asarray(h) <= 0):
        raise AeroCellValidationException('Altitude must be positive, got {0}'.format(h))
    if np.any(np.asarray(r) < 0):
        raise AeroCellValidationException('Horizontal distance must be >= 0')
    return np.arctan2(h, r)


def los_probability(theta, params):
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr < 0) or np.any(theta_arr > math.pi / 2):
        raise AeroCellValidationException('Elevation angle outside [0, pi/2]: {0}'.format(theta))
    degrees = np.degrees(theta_arr)
    return 1.0 / (1.0 + params.a * np.exp(-params.b * (degrees - params.a)))


def nlos_probability(theta, params):
    return 1.0 - los_probability(theta, params)


def path_loss(r, params):
    """Mean path loss in dB at horizontal distance `r`."""
    theta = elevation_angle(params.h, r)
    p_los = los_probability(theta, params)
    d = np.hypot(params.h, r)
    free_space = 20.0 * np.log10(4.0 * math.pi * params.fc * d / SPEED_OF_LIGHT)
    return free_space + p_los * params.eta_los + (1.0 - p_los) * params.eta_nlos


def horizontal_distance(a, b, norm=Norm.L2):
    """Distances between points of `a` (..., 2) and `b` (..., 2) under `norm`."""
    delta = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if as_norm(norm) is Norm.L1:
        return np.abs(delta).sum(axis=-1)
    return np.hypot(delta[..., 0], delta[..., 1])


def _threshold(params):
    if params.pl_threshold is None:
        raise AeroCellValidationException(
            'ChannelParams.pl_threshold is unset; use ChannelParams.calibrated')
    return params.pl_threshold


def is_covered(user_xy, dbs_xy, params):
    r = horizontal_distance(user_xy, dbs_xy, params.horizontal_norm)
    covered = path_loss(r, params) <= _threshold(params)
    if np.ndim(covered) == 0:
        return bool(covered)
    return covered


def coverage_matrix(sites, users, params):
    """Boolean matrix [site][user] of `is_covered`."""
    sites = np.asarray(sites, dtype=float).reshape(-1, 2)
    users = np.asarray(users, dtype=float).reshape(-1, 2)
    if not len(sites) or not len(users):
        return np.zeros((len(sites), len(users)), dtype=bool)
    r = horizontal_distance(sites[:, None, :], users[None, :, :], params.horizontal_norm)
    return path_loss(r, params) <= _threshold(params)


def coverage_radius(params):
    """
    Largest horizontal distance still covered, 0.0 when even the point
    directly below the drone exceeds the threshold.
    """
    threshold = _threshold(params)
    if path_loss(0.0, params) > threshold:
        return 0.0

    upper = max(params.h, 1.0)
    while path_loss(upper, params) <= threshold:
        upper *= 2.0
        if upper > 1e9:
            raise AeroCellValidationException('Coverage radius does not converge')

    radius = brentq(lambda r: float(path_loss(r, params)) - threshold, 0.0, upper, xtol=1e-9)
    logger.debug('Coverage radius {0:.6f} m for threshold {1:.6f} dB'.format(radius, threshold))
    return radius
