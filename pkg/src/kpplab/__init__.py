"""kpplab: a numerical laboratory for KPP fronts in shifting environments.

Submodules
----------
asymptotics     closed-form speeds, exponents and logarithmic-delay laws
traveling_wave  tail-normalized traveling front profiles
linear_oracle   exact/quadrature solutions of the linearized problems
pde_solver      moving-window time stepper for the semilinear equation
front_analysis  level sets, delay fits, profile distances, amplitude laws
acceptance      the frozen verification suites behind `kpplab verify`
cli             the command-line entry point
"""

from . import asymptotics, errors
from .asymptotics import (
    EnvironmentSpec,
    FrontPrediction,
    Regime,
    RegimeLabel,
    classify_regime,
    delay_m,
    delay_m_tilde,
    effective_exponent,
    front_prediction,
    log_coefficient,
    predicted_front,
    spreading_speed,
    wave_speed,
)

__version__ = "0.1.0"
