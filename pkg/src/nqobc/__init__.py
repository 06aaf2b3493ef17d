"""Pointwise Kähler curvature tensors and nonnegative quadratic orthogonal
bisectional curvature (NQOBC).

The main entry points:

* :mod:`nqobc.tensor` - curvature tensors, model spaces, frame changes,
  bisectional matrices and scalar/Ricci curvature
* :mod:`nqobc.unitary` - Haar sampling and elementary frame mixings on U(n)
* :mod:`nqobc.certify` - the QOBC quadratic form and a multistart search for
  violating frames
* :mod:`nqobc.haar` - Monte Carlo checks of the Haar-average identities
* :mod:`nqobc.experiments` - seeded experiment suites
"""

from .certify import (
    CertifyConfig,
    Certificate,
    Witness,
    certify_nqobc,
    curvature_laplacian,
    frame_min,
    lemma43_check,
    qobc_form,
)
from .experiments import cone_eigencheck, run_suite
from .haar import (
    HaarEstimate,
    estimate_F,
    estimate_G,
    verify_claim,
    verify_scalar_identity,
    verify_uv_identity,
    verify_weighted_identity,
)
from .tensor import (
    CurvatureTensor,
    bisectional_matrix,
    constant_hsc,
    flat,
    hsc,
    load_tensor,
    obc,
    product,
    random_kahler,
    ricci,
    save_tensor,
    scalar,
    surface,
    transform,
    validate,
)
from .unitary import frame_act, haar_sample, retract, u0, v0, w0

__version__ = "0.1.0"
