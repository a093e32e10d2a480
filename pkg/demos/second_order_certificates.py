"""
Second-order certificates for dependent quadruples
==================================================

"""

from permforce.certify import certify_non_forcing, check_evidence, check_witness_vector
from permforce.linalg import float_eigenvalues, inertia
from permforce.perturbation import h_gradient_at_zero, paper_layout, quadratic_form_matrix

# gradients of h at the uniform point, one coordinate per checkerboard bump
quad = ["1234", "2143", "3421", "4312"]
for sigma in quad:
    print(sigma, paper_layout(h_gradient_at_zero(sigma, 5))[:60], "...")

# the four gradients are dependent; the combination with all coefficients one vanishes
ev = certify_non_forcing(quad, 7)
print(ev.summary())

# an independent check recomputes the inertia from the characteristic polynomial
print("problems:", check_evidence(ev.to_json()))

# a quadruple where the full form has only one negative direction
special = ["1432", "2341", "3214", "4123"]
ev = certify_non_forcing(special, 4)
print(ev.summary())
print("w+ =", [str(x) for x in ev.w_plus.vector], "value", ev.w_plus.value)

# the tabulated negative direction, checked exactly
value, orth = check_witness_vector(special, 4, [1, 1, 1, 1], [-23, 42, -23, 128, 112, 128, 0, 8, 0])
print("w-^T Q w- =", value, "orthogonal to all gradients:", orth)

# negative control: positive definite, so the test says nothing
Q = quadratic_form_matrix(["1234", "2143", "3412", "4321"], [1, 1, 1, 1], 5)
print("control inertia", inertia(Q).as_tuple(), "smallest eigenvalue", round(float_eigenvalues(Q)[0], 3))
