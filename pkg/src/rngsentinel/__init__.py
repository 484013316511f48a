"""rngsentinel: generate, transform, policy-check, and statistically audit
pseudorandom number streams.

The package splits into a static side (seed provenance, manifests, policy
rules) and a dynamic side (distribution transforms, a goodness-of-fit
battery, and a concurrent stream auditor), plus attack simulations that
exercise both.
"""

from .auditor import (
    AuditedGenerator,
    AuditEvent,
    Auditor,
    AuditorConfig,
    AuditRecord,
    Mode,
)
from .generators import (
    Algorithm,
    CtrCsprng,
    GeneratorHandle,
    Mt19937,
    Philox,
    SecurityClass,
    WeakLcg,
    classify,
    make_generator,
    philox_word,
    raw_to_unit_interval,
)
from .policy import (
    Directive,
    DpContext,
    FunctionFact,
    GeneratorFact,
    PolicyRuleset,
    PolicyViolation,
    RandomnessManifest,
    Rule,
    Severity,
    evaluate_policies,
    remediation_plan,
    transitive_rng_closure,
)
from .seeds import (
    BoundedRange,
    Constant,
    OsEntropy,
    SeedSource,
    SystemTime,
    UserProvided,
    seed_from_source,
)
from .stats import (
    TestReport,
    chi_square_test,
    ks_test,
    monobit_test,
    z_test,
)
from .transforms import (
    DistributionSpec,
    Laplace,
    Normal,
    UniformInt,
    UniformReal,
    box_muller,
    parse_spec,
    sample_iter,
    sample_stream,
    scale_normal,
    to_laplace,
    to_uniform_int,
    to_uniform_real,
)

__version__ = "0.1.0"
