"""Independent symbolic derivation of expected values frozen in the C++ tests.

Run with: python3 tests/oracle/derive_expected.py
Uses sympy only; shares no code with the library.
"""
import sympy as sp

x, y, t = sp.symbols("x y t", real=True)


def cubic(a, b, c, d):
    return a * x**3 + 3 * b * x**2 * y + 3 * c * x * y**2 + d * y**3


def sup_on_circle(expr):
    f = sp.lambdify(t, sp.Abs(expr.subs({x: sp.cos(t), y: sp.sin(t)})), "mpmath")
    import mpmath as mp
    mp.mp.dps = 30
    best = max((f(2 * mp.pi * k / 100000), 2 * mp.pi * k / 100000) for k in range(100000))
    # local refinement
    res = mp.findroot(lambda s: mp.diff(f, s), best[1]) if best[0] != 0 else best[1]
    return max(best[0], f(res))


print("== poly2d")
print("sup |xy| =", sup_on_circle(x * y))
print("sup |4x^2+y^2| =", sup_on_circle(4 * x**2 + y**2))
g = [sp.diff(x**3 + y**3, v) for v in (x, y)]
print("sup |grad(x^3+y^3)|^2 =", sup_on_circle(sp.expand(g[0] ** 2 + g[1] ** 2)), "(sqrt -> grad sup)")
c, s = sp.cos(sp.pi / 4), sp.sin(sp.pi / 4)
comp = sp.expand((x * y).subs({x: c * x - s * y, y: s * x + c * y}, simultaneous=True))
print("xy o rot(pi/4) =", comp)


def disc(a, b, c_, d):
    return 4 * (a * c_ - b**2) * (b * d - c_**2) - (a * d - b * c_) ** 2


print("disc x^3, x^3+y^3, 3x^2y:", disc(1, 0, 0, 0), disc(1, 0, 0, 1), disc(0, 1, 0, 0))
A = sp.Matrix(2, 2, sp.symbols("p q r s"))
a, b, c_, d = sp.symbols("a b c d")
P = cubic(a, b, c_, d)
u = A * sp.Matrix([x, y])
Q = sp.expand(P.subs({x: u[0], y: u[1]}, simultaneous=True))
qa = Q.coeff(x, 3).coeff(y, 0)
qb = Q.coeff(x, 2).coeff(y, 1) / 3
qc = Q.coeff(x, 1).coeff(y, 2) / 3
qd = Q.coeff(x, 0).coeff(y, 3)
ratio = sp.factor(disc(qa, qb, qc, qd) / disc(a, b, c_, d))
print("disc(pi o A)/disc(pi) =", ratio)

print("== optimal metric")


def bracket2(expr):
    return sp.Matrix([[expr.coeff(x, 2), expr.coeff(x, 1).coeff(y, 1) / 2], [expr.coeff(x, 1).coeff(y, 1) / 2, expr.coeff(y, 2)]])


for name, p in [("x^2+y^2", x**2 + y**2), ("xy", x * y), ("4x^2+y^2", 4 * x**2 + y**2)]:
    B = bracket2(p)
    absB = sp.simplify(sp.Matrix(B.diagonalize()[0]) * sp.diag(*[sp.Abs(e) for e in B.diagonalize()[1].diagonal()]) * sp.Matrix(B.diagonalize()[0]).inv())
    print("M2(" + name + ") =", (sup_on_circle(p) * absB).applyfunc(sp.nsimplify).tolist())

for name, p, dsc in [("x^3", cubic(1, 0, 0, 0), 0), ("x^3+y^3", cubic(1, 0, 0, 1), -1), ("3x^2y", cubic(0, 1, 0, 0), 0)]:
    S = bracket2(sp.expand(sp.diff(p, x))) ** 2 + bracket2(sp.expand(sp.diff(p, y))) ** 2
    print(name, "S =", S.tolist(), "disc =", dsc, "sqrt(S) diag ->", [sp.sqrt(S[0, 0]), sp.sqrt(S[1, 1])])

print("== taylor")
f = x**2 * y
h1, h2 = sp.symbols("h1 h2")
ser = sp.expand(f.subs({x: 1 + h1, y: 1 + h2}))
print("x^2y at (1,1), degree-2 part:", sum(tm for tm in ser.as_ordered_terms() if sp.Poly(tm, h1, h2).total_degree() == 2))
ser0 = sp.expand(f.subs({x: h1, y: h2}))
print("x^2y at (0,0), degree-3 part:", ser0)
F = sp.tanh(10 * (sp.sin(5 * y) - 2 * x)) + x**2 * y + y**3
print("synthetic f_x(0,0) =", sp.diff(F, x).subs({x: 0, y: 0}))
print("synthetic jet at (0.2,0.1):")
for k in range(4):
    for l in range(4 - k):
        v = sp.diff(F, x, k, y, l) if k + l else F
        print(f"  D({k},{l}) =", sp.N(v.subs({x: sp.Rational(2, 10), y: sp.Rational(1, 10)}), 20))

print("== fem")
v = [sp.Matrix([0, 0]), sp.Matrix([1, 0]), sp.Matrix([0, 1])]
z = (v[0] + v[1] + v[2]) / 3
S = sp.Rational(2, 3) * sum(((vi - z) * (vi - z).T for vi in v), sp.zeros(2))
print("H of unit right triangle:", S.inv().tolist())
r3 = sp.sqrt(3)
Teq = [sp.Matrix([1, 0]), sp.Matrix([-sp.Rational(1, 2), r3 / 2]), sp.Matrix([-sp.Rational(1, 2), -r3 / 2])]
al, be, ga = sp.symbols("al be ga")
lin = al + be * x + ga * y
sol = sp.solve([lin.subs({x: p[0], y: p[1]}) - p[0] ** 2 for p in Teq], [al, be, ga])
print("P1 interpolant of x^2 on T_eq:", lin.subs(sol))
# integrate |grad(x^2 - I x^2)|^2 over T_eq exactly
err = sp.diff(x**2 - lin.subs(sol), x) ** 2 + sp.diff(x**2 - lin.subs(sol), y) ** 2
# T_eq: x in [-1/2, 1], |y| <= (1 - x)/sqrt(3)
integral = sp.integrate(sp.integrate(err, (y, -(1 - x) / r3, (1 - x) / r3)), (x, -sp.Rational(1, 2), 1))
area = sp.Rational(3, 4) * r3
print("e_Teq(x^2)_2 =", sp.nsimplify(sp.sqrt(sp.simplify(integral / area))))
