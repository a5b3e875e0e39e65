"""
settings.py - Numerical tolerances and their INI persistence

Keys follow the "group/key" layout used with QSettings:
    solver/...       circumball solver
    geometry/...     general position, membership and domain margins
    persistence/...  reduction options
"""

from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

from PyQt6.QtCore import QSettings


@dataclass(frozen=True)
class Tolerances:
    """Thresholds shared by every module"""
    domain_margin: float = 1e-12
    gradient_tol: float = 1e-10
    accept_gradient_tol: float = 1e-8
    max_iterations: int = 200
    armijo_slope: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 60
    condition_limit: float = 1e12
    rank_tol: float = 1e-10
    general_position_tol: float = 1e-10
    membership_tol: float = 1e-9
    containment_slack: float = 1e-12
    monotonicity_tol: float = 1e-9
    clearing: bool = False

    def with_overrides(self, overrides: Dict[str, Any]) -> 'Tolerances':
        """Return a copy with string or typed overrides applied"""
        known = {f.name: f.type for f in fields(self)}
        values: Dict[str, Any] = {}
        for key, raw in overrides.items():
            name = key.split('/')[-1]
            if name not in known:
                raise KeyError(f"Unknown tolerance: {key}")
            values[name] = _coerce(getattr(self, name), raw)
        return replace(self, **values)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()

# INI key for every field
SETTINGS_KEYS = {
    'domain_margin': 'geometry/domain_margin',
    'gradient_tol': 'solver/gradient_tol',
    'accept_gradient_tol': 'solver/accept_gradient_tol',
    'max_iterations': 'solver/max_iterations',
    'armijo_slope': 'solver/armijo_slope',
    'backtrack_factor': 'solver/backtrack_factor',
    'max_backtracks': 'solver/max_backtracks',
    'condition_limit': 'solver/condition_limit',
    'rank_tol': 'geometry/rank_tol',
    'general_position_tol': 'geometry/general_position_tol',
    'membership_tol': 'geometry/membership_tol',
    'containment_slack': 'geometry/containment_slack',
    'monotonicity_tol': 'persistence/monotonicity_tol',
    'clearing': 'persistence/clearing',
}


def _coerce(default: Any, raw: Any) -> Any:
    if isinstance(default, bool):
        if isinstance(raw, str):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return bool(raw)
    if isinstance(default, int):
        return int(raw)
    return float(raw)


def load_tolerances(path: Optional[str] = None) -> Tolerances:
    """Read tolerances from an INI file; missing keys keep their defaults"""
    if not path:
        return DEFAULT_TOLERANCES

    settings = QSettings(path, QSettings.Format.IniFormat)
    values: Dict[str, Any] = {}
    for name, key in SETTINGS_KEYS.items():
        default = getattr(DEFAULT_TOLERANCES, name)
        if not settings.contains(key):
            continue
        if isinstance(default, bool):
            values[name] = settings.value(key, default, type=bool)
        elif isinstance(default, int):
            values[name] = settings.value(key, default, type=int)
        else:
            values[name] = settings.value(key, default, type=float)
    return replace(DEFAULT_TOLERANCES, **values)


def save_tolerances(tol: Tolerances, path: str) -> None:
    """Write every tolerance to an INI file"""
    settings = QSettings(path, QSettings.Format.IniFormat)
    for name, key in SETTINGS_KEYS.items():
        settings.setValue(key, getattr(tol, name))
    settings.sync()
