"""
Pattern densities in permutations and step permutons
=====================================================

"""

from fractions import Fraction

from permforce.perms import enumerate_Sk, parse_permutation, pattern_density_perm
from permforce.permuton import (
    StepPermuton,
    density_in_step_permuton,
    mc_density_estimate,
    mixture_of_permutation_matrices,
)

# density of 132 in a fixed permutation: 3 of the 10 triples
pi = parse_permutation("15234")
print("d(132, 15234) =", pattern_density_perm(parse_permutation("132"), pi))

# a step permuton built from a mixture of two permutation matrices
P = mixture_of_permutation_matrices(["1234", "2143"], [Fraction(2, 3), Fraction(1, 3)])
print(P.A)

# exact densities of every 3-pattern; they sum to one
dens = {str(s): density_in_step_permuton(s, P) for s in enumerate_Sk(3)}
for s, d in dens.items():
    print(s, d)
print("total", sum(dens.values()))

# the uniform permuton gives every pattern of size m the density 1/m!
U = StepPermuton.uniform(3)
print("d(2413, uniform) =", density_in_step_permuton("2413", U))

# sampling agrees with the exact value
p, se = mc_density_estimate("123", P, trials=200_000, seed=1)
print(f"123: exact {float(dens['123']):.5f}, sampled {p:.5f} +- {se:.5f}")
