# %% [markdown]
# # Hunting for frames that violate NQOBC
#
# At a fixed frame the form `sum_ij R(e_i, ē_i, e_j, ē_j) (xi_i - xi_j)^2` is
# `2 xi^T L xi` with `L` the Laplacian of the bisectional matrix. The
# certifier minimizes the smallest eigenvalue of `L` off the constants over the
# unitary group. A negative value comes with an explicit witness; otherwise
# the answer is only "nothing found".

# %%
import numpy as np

from nqobc import certify, experiments, tensor

np.set_printoptions(precision=4, suppress=True)

# %% [markdown]
# Negative constant holomorphic sectional curvature fails already at the
# identity frame.

# %%
cert = certify.certify_nqobc(tensor.constant_hsc(2, -1.0))
print(cert.status, "at restart", cert.restarts, "| value", cert.witness.value, "| xi", cert.witness.xi)

# %% [markdown]
# The zero-scalar product of a hyperbolic surface and a sphere is NQOBC:
# the smallest eigenvalue is zero on every frame.

# %%
cert = certify.certify_nqobc(experiments.sigma_cp1(), restarts=50)
print(cert.status, "| min eigenvalue seen:", f"{cert.min_lambda:.1e}")

# %% [markdown]
# Adding a flat direction breaks this. The frame
# `((e0 + e2)/sqrt2, e1, (e0 - e2)/sqrt2)` with `xi = (1, 0, 0)` gives -1/2,
# and the search finds a comparable witness on its own.

# %%
T3 = tensor.product(tensor.surface(-1.0), tensor.surface(1.0), tensor.flat(1))
U, xi = experiments.flatness_witness()
print("derived witness:", certify.qobc_form(T3, U, xi))
cert = certify.certify_nqobc(T3, restarts=50)
print(cert.status, "| searched witness value:", round(cert.witness.value, 4))

# %% [markdown]
# For a product with a one-dimensional first factor, NQOBC forces
# `sum_{j>=1} R(e1, ē1, e_j, ē_j) >= -R(e0, ē0, e0, ē0)`. Making the surface
# too negative breaks the inequality, and the certifier agrees.

# %%
for h in (-1.0, -3.0):
    T = tensor.product(tensor.surface(h), tensor.surface(1.0))
    r = certify.lemma43_check(T)
    print(f"h = {h:+}: lhs = {r.lhs}, rhs = {r.rhs}, holds = {r.holds},",
          certify.certify_nqobc(T, restarts=20).status)

# %% [markdown]
# Negative scalar curvature rules out NQOBC, so every such tensor should
# produce a witness.

# %%
found = sum(certify.certify_nqobc(T, restarts=20, seed=k).violation
            for k, T in enumerate(experiments.negative_scalar_tensors(30, seed=3)))
print(f"witnesses found for {found} of 30 tensors with negative scalar curvature")
