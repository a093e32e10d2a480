"""
A non-uniform witness for an exceptional quadruple
===================================================

"""

from permforce.exceptional import TARGET, build_case, emit_witness, solve_case, verify_lemma_facts
from permforce.permuton import pattern_frequencies

# mixture of three permutation matrices with weights st, s(1-t), 1-s
case = build_case(1)
print("quadruple", [str(p) for p in case.quadruple], "k =", case.k)

# nested bisection with exact signs; enclosures have width 2^-40
w = solve_case(1)
print(f"s = {float(w.s):.12f}  t = {float(w.t):.12f}  residual {float(w.max_residual):.1e}")

# the witness permuton and its exact densities at the dyadic midpoint
b = emit_witness(1, w)
for p, d in b.densities.items():
    print(p, f"{float(d - TARGET):+.2e}")

# sampled frequencies, in standard errors
n = 1_000_000
freq = pattern_frequencies(b.permuton, 4, n, seed=7)
se = (float(TARGET) * (1 - float(TARGET)) / n) ** 0.5
for p in case.quadruple:
    print(p, f"z = {(freq.get(p, 0) / n - float(TARGET)) / se:+.2f}")

# replay the sign arguments behind the bisection
print(verify_lemma_facts(1).section.summary())
