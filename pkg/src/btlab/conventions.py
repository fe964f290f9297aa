"""Sign and normalization conventions, kept in one place.

Weights: a local frame s of L has |s|^2 = exp(-2 phi), so R^L = 2 d dbar phi and
the curvature endomorphism against Theta is mu = 2 phi_{z zbar} / Theta_11.
K-coordinates write phi = lam |u|^2 + ..., hence mu = 2 lam (det Rdot = 2^n prod lam).

omega = (i / 2 pi) R^L, so omega_11 = phi_{z zbar} / pi and h^{11} = 1 / omega_11.

Volume: dv = Theta^n / n! = 2^n Theta_11 dx dy (n = 1), i.e. dv = V_Theta dlambda
with dlambda = 2^n dx.

Pointwise pairings (n = 1, forms written without the factor i):
    <a dz | b dz>_omega = a conj(b) h^{11}
    <a dz^dzbar | b dz^dzbar>_omega = a conj(b) (h^{11})^2
so that <omega|omega>_omega = n with omega = i omega_11 dz^dzbar.

Ric_omega = -dbar d log V_omega and R^det_Theta = -dbar d log V_Theta, i.e. both carry
the coefficient (log V)_{z zbar} on dz^dzbar.

<d f | d gbar>_omega = f_z g_zbar h^{11}. This choice reproduces the Bargmann identity
T_z T_zbar - T_{|z|^2} = -(1/k) P, i.e. b_{f,g,1} - b_{fg,1} = -1/(2 pi) for f=z, g=zbar.

Poisson bracket on (M, 2 pi omega):
    {f, g} = (i / 2 pi) h^{11} (f_z g_zbar - g_z f_zbar)
which is the sign making C_1(f,g) - C_1(g,f) = i {f,g} and k[T_f, T_g] -> i T_{f,g}.
"""
import hashlib

DEGENERACY_TOL = 1e-8
CUTOFF_EXPONENT = 8
TAYLOR_ORDER = 8

# bumped whenever any formula above changes; hashed into every report
LEDGER = (
    "phi:|s|^2=exp(-2phi);mu=2phi_zzb/theta;omega=phi_zzb/pi;"
    "dv=V_theta*2^n dx;pair11=h^2;Ric=(logV)_zzb;"
    "pair_df_dgbar=f_z g_zb h;poisson=(i/2pi)h(f_z g_zb-g_z f_zb)"
)


def ledger_hash():
    return hashlib.sha256(LEDGER.encode()).hexdigest()[:16]
