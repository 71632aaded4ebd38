"""Rate and time conversions between lab units and natural units of Gamma.

Internally every rate is expressed in units of the excited-state decay rate
Gamma and every time in units of 1/Gamma. Frequencies quoted in MHz follow the
usual "2pi x f MHz" convention, so ``f`` is an ordinary frequency and the
angular rate is ``2*pi*f*1e6`` rad/s.
"""

import math

#: 85Rb D1 natural linewidth, ordinary frequency in MHz (Gamma = 2pi x 5.75 MHz).
GAMMA_MHZ_RB85_D1 = 5.75


def mhz_to_gamma(f_mhz, gamma_mhz=GAMMA_MHZ_RB85_D1):
    return f_mhz / gamma_mhz


def gamma_to_mhz(x, gamma_mhz=GAMMA_MHZ_RB85_D1):
    return x * gamma_mhz


def gamma_rad_per_s(gamma_mhz=GAMMA_MHZ_RB85_D1):
    return 2.0 * math.pi * gamma_mhz * 1e6


def seconds_to_tau(t_s, gamma_mhz=GAMMA_MHZ_RB85_D1):
    """Convert seconds to units of 1/Gamma."""
    return t_s * gamma_rad_per_s(gamma_mhz)


def tau_to_seconds(t, gamma_mhz=GAMMA_MHZ_RB85_D1):
    return t / gamma_rad_per_s(gamma_mhz)


def ns_to_tau(t_ns, gamma_mhz=GAMMA_MHZ_RB85_D1):
    return seconds_to_tau(t_ns * 1e-9, gamma_mhz)


def tau_to_ns(t, gamma_mhz=GAMMA_MHZ_RB85_D1):
    return tau_to_seconds(t, gamma_mhz) * 1e9
