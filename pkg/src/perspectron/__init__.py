"""Margin-based learning of halfspaces and generalized linear models under
Massart noise: stochastic perspective-reweighted perceptron iterations,
hypothesis selection, separating-hyperplane certificates, synthetic data
generation and a seeded experiment harness."""

from .model import (
    Hypothesis,
    LinkFunction,
    beta_sign,
    empirical_zero_one,
    homogenize_example,
    homogenize_halfspace,
    leaky_relu,
    leaky_relu_coeff,
    linear_link,
    link_from_name,
    project_to_ball,
    ramp_clip,
    scaled_tanh,
    shifted_ramp,
    sign_conv,
)
from .synth import (
    Constant,
    FiniteAtoms,
    GlmInstance,
    LabeledExample,
    MarginStress,
    MassartInstance,
    PerAtom,
    Regional,
    Sample,
    SphereWithBand,
    derive_rng,
    disagreement_mass,
    exact_opt_rcn,
    exact_zero_one,
    make_glm_instance,
    make_instance,
    read_dataset,
    sample_glm,
    sample_massart,
    write_dataset,
)
from .learn import (
    TrainConfig,
    TrainResult,
    baseline_perceptron,
    config_from_theory,
    default_params,
    glm_step,
    perspectron_step,
    run_restart,
    select_hypothesis,
    train_glm,
    train_halfspace,
    train_unknown_eta,
)
from .certify import (
    CertificateReport,
    cert_glm_bounded,
    cert_glm_unbounded,
    cert_halfspace_bounded,
    cert_halfspace_bounded_mismatched,
    cert_halfspace_unbounded,
    eq4_identity_check,
    push_away,
    push_away_batch,
    push_away_property_check,
)
from .harness import (
    ExperimentSpec,
    SweepResult,
    TrialRecord,
    emit_csv,
    emit_plotdata,
    parse_csv,
    run_experiment,
    run_sweep,
    run_trial,
    wilson_interval,
)

__version__ = "0.1.0"
