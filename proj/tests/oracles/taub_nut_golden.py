"""Symbolic |Rm| of the one-centre Gibbons-Hawking (Taub-NUT) metric.

Coordinates (x1, x2, x3, t); V = 1 + c/rho, theta = dt + A with
A = c (x1/rho - 1) dphi, phi = atan2(x3, x2). |Rm|^2 = R_abcd R^abcd.
"""
import sympy as sp

x1, x2, x3, t = sp.symbols('x1 x2 x3 t', real=True)
c = sp.Rational(1, 1) / (4 * sp.pi)
X = [x1, x2, x3, t]
rho = sp.sqrt(x1**2 + x2**2 + x3**2)
r2 = x2**2 + x3**2
V = 1 + c / rho
Aphi = c * (x1 / rho - 1)
A = [0, -Aphi * x3 / r2, Aphi * x2 / r2]
theta = A + [1]
g = sp.zeros(4, 4)
for i in range(4):
    for j in range(4):
        g[i, j] = (V if (i == j and i < 3) else 0) + theta[i] * theta[j] / V

pt = {x1: sp.Rational(3, 10), x2: sp.Rational(4, 10), x3: sp.sqrt(sp.Rational(75, 100))}


def ev(e):
    return sp.N(e.subs(pt), 30)


# derivatives of g evaluated at the point
dg = [[[ev(sp.diff(g[i, j], X[k])) for k in range(4)] for j in range(4)] for i in range(4)]
ddg = [[[[ev(sp.diff(g[i, j], X[k], X[l])) for l in range(4)] for k in range(4)]
        for j in range(4)] for i in range(4)]
G = g.subs(pt).evalf(30)
Gi = G.inv()
# Christoffel of the first kind and second kind
Gam1 = [[[sp.Rational(1, 2) * (dg[a][b][cc] + dg[a][cc][b] - dg[b][cc][a]) for cc in range(4)]
         for b in range(4)] for a in range(4)]
Gam2 = [[[sum(Gi[e, a] * Gam1[a][b][cc] for a in range(4)) for cc in range(4)] for b in range(4)]
        for e in range(4)]
R = {}
for a in range(4):
    for b in range(4):
        for cc in range(4):
            for d in range(4):
                val = sp.Rational(1, 2) * (ddg[a][d][b][cc] + ddg[b][cc][a][d]
                                           - ddg[a][cc][b][d] - ddg[b][d][a][cc])
                val += sum(G[e, f] * (Gam2[e][b][cc] * Gam2[f][a][d] - Gam2[e][b][d] * Gam2[f][a][cc])
                           for e in range(4) for f in range(4))
                R[(a, b, cc, d)] = val
import numpy as np
Rn = np.zeros((4, 4, 4, 4))
for k, v in R.items():
    Rn[k] = float(v)
Gin = np.array(Gi.tolist(), dtype=float)
Rup = np.einsum('ap,bq,cr,ds,pqrs->abcd', Gin, Gin, Gin, Gin, Rn)
print("rho =", float(ev(rho)))
print("|Rm| =", repr(float(np.sqrt(np.einsum('abcd,abcd->', Rn, Rup)))))
ric = np.einsum('ac,abcd->bd', Gin, Rn)
print("max|Ric comp| =", np.abs(ric).max())
