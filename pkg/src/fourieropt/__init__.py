"""Fourier-series open-loop control of a stick-slip pendulum capsule, tuned by
Differential Evolution with optional harmonic continuation."""

from .campaign import (
    CampaignConfig,
    CampaignRecord,
    SearchLimits,
    evaluate_cost,
    extend_vector,
    relative_change,
    run_campaign,
    run_iterative,
    run_noniterative,
    simulate,
    simulate_trajectory,
    summarize,
    vector_to_control,
)
from .capsule_plant import CapsuleParams, CapsuleState, CapsuleSystem, Mode
from .evolution import BoxBounds, DeConfig, OptimizationResult, optimize
from .fourier_control import (
    ControlBounds,
    ControlShape,
    FourierControl,
    SpanParams,
    build_control,
    extend_harmonics,
)
from .hybrid_integrator import IntegratorConfig, Trajectory, integrate

__version__ = "0.1.0"

__all__ = [
    "BoxBounds", "CampaignConfig", "CampaignRecord", "CapsuleParams", "CapsuleState",
    "CapsuleSystem", "ControlBounds", "ControlShape", "DeConfig", "FourierControl",
    "IntegratorConfig", "Mode", "OptimizationResult", "SearchLimits", "SpanParams",
    "Trajectory", "build_control", "evaluate_cost", "extend_harmonics", "extend_vector",
    "integrate", "optimize", "relative_change", "run_campaign", "run_iterative",
    "run_noniterative", "simulate", "simulate_trajectory", "summarize", "vector_to_control",
]
