"""Independent golden values for the regularized periodic potential.

Brute-force paired partial sums in mpmath with nsum tail acceleration.
"""
import mpmath as mp

mp.mp.dps = 40


def v0(eps, u, y1, y2):
    eps, u, y1, y2 = map(mp.mpf, (eps, u, y1, y2))
    r2 = y1**2 + y2**2
    a0 = 2 / eps * (-mp.euler + mp.log(2 * eps))
    centre = 1 / mp.sqrt(u**2 + r2) - a0
    pair = lambda n: (1 / mp.sqrt((u + n * eps)**2 + r2)
                      + 1 / mp.sqrt((u - n * eps)**2 + r2) - 2 / (n * eps))
    return (centre + mp.nsum(pair, [1, mp.inf])) / (4 * mp.pi)


if __name__ == "__main__":
    print("v0(1;0.5,0,0)            =", mp.nstr(v0(1, 0.5, 0, 0), 20))
    print("v0(0.1;0.05,0.1,0.2)     =", mp.nstr(v0(0.1, 0.05, 0.1, 0.2), 20))
    print("  + f/eps, f=y1^2-y2^2   =", mp.nstr(v0(0.1, 0.05, 0.1, 0.2) + (mp.mpf('0.1')**2 - mp.mpf('0.2')**2) / mp.mpf('0.1'), 20))
    print("v0(0.3;0.11,0.2,0.05)    =", mp.nstr(v0(0.3, 0.11, 0.2, 0.05), 20))
    print("v0(1;0.3,0.4,0)          =", mp.nstr(v0(1, 0.3, 0.4, 0), 20))
    # large-r behaviour of the eps=1 potential
    for r in (2, 4, 8):
        print("v0(1;0,%d,0)+log(r)/2pi =" % r, mp.nstr(v0(1, 0, r, 0) + mp.log(r) / (2 * mp.pi), 15))
    print("regular part at nut      =", mp.nstr(-(2 * (-mp.euler + mp.log(2))) / (4 * mp.pi), 20))
