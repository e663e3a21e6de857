"""Proximal gradient methods with alternated inertia and rate diagnostics."""

from .objective import (CompositeProblem, HalfNorm, L1, LeastSquares, Logistic,
                        ZeroReg, dist_subgradient, lambda_max_ata,
                        lipschitz_constant, loss_gradient, loss_value, reg_value)
from .proxstep import (NonFiniteIterateError, ProxResult, prox_gradient_step,
                       prox_half, prox_l1, residual)
from .schedules import (FixedSchedule, InertiaSchedule, LinearOverASchedule,
                        NesterovSqrtSchedule, PowerOverASchedule,
                        alpha_sequence, next_alpha, parse_schedule)
from .solvers import (DivergenceDetected, SolverConfig, SolverTrace,
                      TraceRecord, gamma_max_search, run,
                      run_alternated_extrapolation, run_alternated_inertia,
                      run_inertial, run_mfista, run_vanilla)
from .klrates import (CoefficientSequence, EnvelopeReport, KLFit, KLRecurrence,
                      RateEnvelope, check_envelope, classify_regime, envelope,
                      estimate_liminf_constants, finite_termination_bound,
                      kl_constant_estimate, minimal_kl_constant,
                      simulate_recurrence, weak_descent_coefficients)
from .diagnostics import (CheckReport, check_alternated_descent,
                          check_contraction, check_descent_lemma, check_fejer,
                          check_extrapolation_rate,
                          check_strong_convexity_resilience,
                          check_subgrad_bound, default_suite,
                          suite_problem_families)
from .experiments import (DatasetRecord, LassoSpec, gen_lasso,
                          gen_logistic_dataset, load_ionosphere,
                          logistic_problem, quadratic_problem, read_trace,
                          rng_from_seed, write_trace)

__version__ = "0.1.0"
