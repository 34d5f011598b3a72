"""Codivergences, divergence matrices and their structural guarantees.

A codivergence D(p0 | p1, p2) measures the relative position of two
probability measures around a reference measure; this package evaluates the
covariance- and correlation-type constructions exactly on finite discrete
measures, provides closed forms for common parametric families together with
independent quadrature/series oracles, and verifies the structural
guarantees (positive semi-definiteness, rank identities, data-processing
inequality, local bilinear expansion) of the associated divergence matrices.

Extended-real results are plain floats; ``math.inf`` is the infinite value.
"""

from .codivergence import (PHI_IDENTITY, PHI_SQRT, PhiFunction, chi2_codiv,
                           chi2_divergence, hellinger_affinity, hellinger_codiv,
                           phi_alpha, r_alpha, r_phi, v_alpha, v_phi)
from .errors import (CodivError, DegeneratePhiError, DimensionMismatchError,
                     DominationError, KindMismatchError, OracleFailureError,
                     PreconditionError)
from .families import (BernoulliProd, ExponentialProd, GammaProd, GaussianIso,
                       GenericExpFam, ParamFamily, PoissonProd, as_generic,
                       family_from_json_dict, gamma_first_order, r_alpha_closed,
                       r_alpha_closed_log1p, r_alpha_product)
from .local import (ExpansionReport, OffSupportReport, PerturbationPair,
                    expansion_check, fisher_gram, fisher_inner,
                    geometric_decay_ok, hellinger_off_support_check)
from .matrices import (DiagnosticStatus, DivMatrix, DpiReport, EigenSummary,
                       MarkovKernel, RankReport, chi2_signed,
                       chi2_signed_decomposition_check, divergence_matrix,
                       dpi_check, eigen_summary, is_psd, jacobi_eigenvalues,
                       link_identity_check, phi_normalizers, push_forward,
                       quadratic_form_check, rank_with_identity)
from .measures import (DensityRatio, DiscreteMeasure, JordanDecomposition,
                       SignedMeasure, density_ratio, dominated_by, ess_sup_ratio,
                       is_valid_perturbation, jordan_decompose, perturb,
                       validity_radius)
from .oracles import (OracleConfig, adaptive_gauss_legendre,
                      oracle_discrete_bruteforce, oracle_r_alpha)

__version__ = "0.1.0"
