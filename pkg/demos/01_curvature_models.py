# %% [markdown]
# # Curvature tensors and bisectional matrices
#
# A Kähler curvature tensor is stored as `R[i, j, k, l] = R(e_i, ē_j, e_k, ē_l)`.
# Here we build the model tensors, move them to other unitary frames and read
# off holomorphic sectional and bisectional curvatures.

# %%
import numpy as np

from nqobc import tensor
from nqobc._rng import stream
from nqobc.unitary import haar_sample

np.set_printoptions(precision=4, suppress=True)

# %% [markdown]
# Constant holomorphic sectional curvature `c`: every unit vector has
# holomorphic sectional curvature `c`, and every orthogonal pair has
# bisectional curvature `c/2`, in any frame.

# %%
P = tensor.constant_hsc(3, 1.0)
U = haar_sample(3, stream(1))
print("bisectional matrix in a random frame:\n", tensor.bisectional_matrix(P, U))
print("scalar curvature:", tensor.scalar(P), "(c n (n+1) / 2 = 6)")

# %% [markdown]
# A product of a hyperbolic surface with a round sphere has zero scalar
# curvature. In a generic frame the holomorphic sectional curvatures are
# opposite and the orthogonal bisectional curvature vanishes.

# %%
S = tensor.product(tensor.surface(-1.0), tensor.surface(1.0))
for key in range(3):
    A = tensor.bisectional_matrix(S, haar_sample(2, stream(2, key)))
    print(f"frame {key}: H(f1) = {A[0, 0]:+.4f}, H(f2) = {A[1, 1]:+.4f}, F(12) = {A[0, 1]:+.1e}")

# %% [markdown]
# Random tensors are projections of Gaussian noise onto the symmetric space,
# so they satisfy every Kähler identity. Scalar curvature and the Ricci
# spectrum do not depend on the frame.

# %%
T = tensor.random_kahler(4, seed=7)
print("symmetry violations:", tensor.validate(T))
V = haar_sample(4, stream(3))
TV = tensor.transform(T, V)
print("scalar:", tensor.scalar(T), "->", tensor.scalar(TV))
print("Ricci spectrum:", np.linalg.eigvalsh(tensor.ricci(T)))
print("after transform:", np.linalg.eigvalsh(tensor.ricci(TV)))

# %% [markdown]
# Tensors round-trip through JSON exactly.

# %%
import tempfile
from pathlib import Path

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "t.json"
    tensor.save_tensor(T, path)
    print("exact round trip:", np.array_equal(tensor.load_tensor(path).components, T.components))
