"""
Latin squares and dependent quadruples of S_4
==============================================

"""

from collections import Counter

from permforce.certify import (
    classify_quadruple,
    enumerate_allone_quadruples,
    enumerate_zerocombo_quadruples,
    trichotomy_scan,
)

# every Latin square of order 4 splits into four permutation matrices
e = enumerate_allone_quadruples()
print(e.latin_squares, "Latin squares give", e.quadruples, "quadruples in", len(e.classes), "classes")
for q in e.classes:
    print("  ", " ".join(map(str, q)))

# quadruples with A1 + A2 - A3 - A4 = 0
for q in enumerate_zerocombo_quadruples():
    print("   {} + {} = {} + {}".format(*q))

# one quadruple of each kind
print(classify_quadruple(["2143", "3412", "2413", "3142"]).to_json())
print(classify_quadruple(["1234", "1243", "1324", "1342"]).to_json())

# all 10626 quadruples of S_4
print(Counter(trichotomy_scan()))
