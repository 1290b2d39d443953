"""Scenario configuration, 3D geometry, path loss, and Rician channel draws.

Default geometry: BS at (0, 0, 10), RIS at (80, 10, 10), users dropped
uniformly on a 5 m disk around (100, 0, 1.5).  Path-loss and Rician
parameters follow common practice for this setup and are all overridable
through the config file; powers are stored internally in watts and accepted
in dBm/dBW/mW/W at the I/O boundary.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import InvalidInput


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm):
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(p):
    return 10.0 * np.log10(p) + 30.0


def parse_power(value):
    """Parse a power value with explicit unit suffix into watts.

    Accepts plain numbers (watts) or strings like '20 dBm', '9dBW',
    '5 mW', '0.1 W'.
    """
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    lowered = text.lower().replace(" ", "")
    for suffix, conv in (
        ("dbm", dbm_to_watts),
        ("dbw", db_to_linear),
        ("mw", lambda x: 1e-3 * x),
        ("w", lambda x: x),
    ):
        if lowered.endswith(suffix):
            return float(conv(float(lowered[: -len(suffix)])))
    return float(text)


# Config fields that hold a power and therefore accept unit suffixes.
_POWER_FIELDS = {"sigma_d_sq", "sigma_k_sq", "p_sw", "p_dc", "p_bs", "p_budget"}
_POSITION_FIELDS = {"bs_pos", "ris_pos", "user_center"}
_INT_FIELDS = {"N", "M", "K", "seed"}


@dataclass
class ScenarioConfig:
    N: int = 4                      # BS antennas
    M: int = 16                     # RIS elements
    K: int = 3                      # users
    bs_pos: tuple = (0.0, 0.0, 10.0)
    ris_pos: tuple = (80.0, 10.0, 10.0)
    user_center: tuple = (100.0, 0.0, 1.5)
    user_radius: float = 5.0
    # Rician K-factors (linear): 10 dB on the RIS links, Rayleigh-heavy direct
    rician_k_bs_ris: float = 10.0
    rician_k_ris_user: float = 10.0
    rician_k_bs_user: float = 1.0
    # Path loss C0 * d^-alpha, C0 at 1 m
    c0_db: float = -30.0
    pl_exp_bs_ris: float = 2.2
    pl_exp_ris_user: float = 2.3
    pl_exp_bs_user: float = 3.5
    # Noise powers (W); -70 dBm defaults
    sigma_d_sq: float = 1e-10
    sigma_k_sq: float = 1e-10
    # Hardware impairments
    kappa_t: float = 0.01**2
    kappa_r: float = 0.01**2
    # Amplifier inefficiencies and static powers
    xi_t: float = 1.2
    xi_a: float = 1.2
    p_sw: float = 1e-3
    p_dc: float = 5e-3
    p_bs: float = db_to_linear(9.0)  # 9 dBW; excluded from p_budget
    # Total budget P (excludes p_bs) and its split policy
    p_budget: float = dbm_to_watts(20.0)
    split_rule: str = "even"
    seed: int = 0

    def __post_init__(self):
        if min(self.N, self.M, self.K) < 1:
            raise InvalidInput("N, M, K must all be >= 1")
        if not (0.0 <= self.kappa_t < 1.0 and 0.0 <= self.kappa_r < 1.0):
            raise InvalidInput("kappa coefficients must lie in [0, 1)")
        if self.xi_t < 1.0 or self.xi_a < 1.0:
            raise InvalidInput("xi_t, xi_a are inverse efficiencies, must be >= 1")
        for name in _POWER_FIELDS:
            if getattr(self, name) < 0:
                raise InvalidInput(f"{name} must be non-negative")

    def with_updates(self, **kwargs):
        return replace(self, **kwargs)


@dataclass
class ChannelSet:
    """One scenario draw: G (M x N), h (K x M rows), f (K x N rows)."""

    G: np.ndarray
    h: np.ndarray
    f: np.ndarray
    user_pos: np.ndarray = field(default=None, repr=False)

    @property
    def M(self):
        return self.G.shape[0]

    @property
    def N(self):
        return self.G.shape[1]

    @property
    def K(self):
        return self.h.shape[0]


def path_loss_gain(d, c0_db, exponent):
    """Linear power gain 10^(C0/10) * d^-exponent at distance d meters."""
    if d <= 0:
        raise InvalidInput("distance must be positive")
    return db_to_linear(c0_db) * d ** (-exponent)


def steering_vector(n, angle):
    """Half-wavelength ULA response, unit-modulus entries."""
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def _link_angle(src, dst):
    # Azimuth of the departure direction; array orientation is unspecified in
    # the setup, so the x-y plane angle is used.
    d = np.asarray(dst, float) - np.asarray(src, float)
    return np.arctan2(d[1], d[0])


def rician_matrix(rows, cols, k_factor, los, rng):
    """sqrt(K/(1+K)) * los + sqrt(1/(1+K)) * CN(0,1) entries."""
    if k_factor < 0:
        raise InvalidInput("Rician factor must be non-negative")
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))
    nlos /= np.sqrt(2.0)
    w_los = np.sqrt(k_factor / (1.0 + k_factor))
    w_nlos = np.sqrt(1.0 / (1.0 + k_factor))
    return w_los * los + w_nlos * nlos


def _draw_user_positions(cfg, rng):
    r = cfg.user_radius * np.sqrt(rng.uniform(0.0, 1.0, cfg.K))
    ang = rng.uniform(0.0, 2.0 * np.pi, cfg.K)
    center = np.asarray(cfg.user_center, float)
    pos = np.tile(center, (cfg.K, 1))
    pos[:, 0] += r * np.cos(ang)
    pos[:, 1] += r * np.sin(ang)
    return pos


def generate_channels(cfg, rng):
    """Draw one ChannelSet; deterministic under a fixed (config, rng seed)."""
    bs = np.asarray(cfg.bs_pos, float)
    ris = np.asarray(cfg.ris_pos, float)
    users = _draw_user_positions(cfg, rng)

    d_br = np.linalg.norm(ris - bs)
    gain_G = path_loss_gain(d_br, cfg.c0_db, cfg.pl_exp_bs_ris)
    los_G = np.outer(
        steering_vector(cfg.M, _link_angle(ris, bs)),
        steering_vector(cfg.N, _link_angle(bs, ris)).conj(),
    )
    G = np.sqrt(gain_G) * rician_matrix(cfg.M, cfg.N, cfg.rician_k_bs_ris, los_G, rng)

    h = np.empty((cfg.K, cfg.M), dtype=complex)
    f = np.empty((cfg.K, cfg.N), dtype=complex)
    for k in range(cfg.K):
        d_ru = np.linalg.norm(users[k] - ris)
        d_bu = np.linalg.norm(users[k] - bs)
        los_h = steering_vector(cfg.M, _link_angle(ris, users[k]))[:, None]
        los_f = steering_vector(cfg.N, _link_angle(bs, users[k]))[:, None]
        gain_h = path_loss_gain(d_ru, cfg.c0_db, cfg.pl_exp_ris_user)
        gain_f = path_loss_gain(d_bu, cfg.c0_db, cfg.pl_exp_bs_user)
        h[k] = np.sqrt(gain_h) * rician_matrix(cfg.M, 1, cfg.rician_k_ris_user, los_h, rng)[:, 0]
        f[k] = np.sqrt(gain_f) * rician_matrix(cfg.N, 1, cfg.rician_k_bs_user, los_f, rng)[:, 0]

    return ChannelSet(G=G, h=h, f=f, user_pos=users)


def split_budget(cfg):
    """Amplifier-side power split (P_T, P_A, ris_active) for the active scheme.

    The budget P covers xi_T*P_T + xi_A*P_A + M*(P_SW + P_DC); the default
    rule splits the amplifier share evenly between the two sides.  When the
    budget cannot cover the RIS circuit power the surface stays off and the
    whole budget feeds the BS amplifier.
    """
    circuit = cfg.M * (cfg.p_sw + cfg.p_dc)
    amp = cfg.p_budget - circuit
    if amp <= 0:
        return cfg.p_budget / cfg.xi_t, 0.0, False
    if cfg.split_rule == "even":
        frac = 0.5
    elif cfg.split_rule.startswith("fraction="):
        frac = float(cfg.split_rule.split("=", 1)[1])
        if not (0.0 < frac < 1.0):
            raise InvalidInput("transmit fraction must lie in (0, 1)")
    else:
        raise InvalidInput(f"unknown split_rule {cfg.split_rule!r}")
    return frac * amp / cfg.xi_t, (1.0 - frac) * amp / cfg.xi_a, True


def split_budget_passive(cfg):
    """Transmit power for the unit-modulus baseline: xi_T*P_T = P - M*P_SW."""
    amp = cfg.p_budget - cfg.M * cfg.p_sw
    if amp <= 0:
        return cfg.p_budget / cfg.xi_t, False
    return amp / cfg.xi_t, True


def load_config(path):
    """Read a flat `key = value` config file into a ScenarioConfig.

    Lines starting with '#' are comments.  Positions are comma triples,
    power fields accept dBm/dBW/mW/W suffixes.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    overrides = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInput(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise InvalidInput(f"{path}:{lineno}: unknown config key {key!r}")
            overrides[key] = _parse_config_value(key, value)
    return ScenarioConfig(**overrides)


def _parse_config_value(key, value):
    if key in _POSITION_FIELDS:
        parts = [float(p) for p in value.split(",")]
        if len(parts) != 3:
            raise InvalidInput(f"{key} must be a comma triple of meters")
        return tuple(parts)
    if key in _POWER_FIELDS:
        return parse_power(value)
    if key in _INT_FIELDS:
        return int(value)
    if key == "split_rule":
        return value
    return float(value)


def save_config(cfg, path):
    """Write the config in the same flat key=value format (powers in watts)."""
    lines = []
    for f in fields(ScenarioConfig):
        value = getattr(cfg, f.name)
        if f.name in _POSITION_FIELDS:
            value = ",".join(repr(v) for v in value)
        lines.append(f"{f.name} = {value}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
