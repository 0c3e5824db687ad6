"""Non-fibre-preserving maps acting on a plane wave.

A plane wave Theta = beta x - beta^2 t / 2 with constant density is mapped by
the antiboost and by the time dilation. Both images are again plane waves;
the script reads off the new slope and density and compares them with the
closed-form predictions.
"""

import numpy as np

from fluidsym.bargmann import extended_map, plane_wave, project_transform

beta, R0, t = 0.6, 1.3, 0.4
xq = np.linspace(-1.0, 1.0, 21)
src = plane_wave(beta, R0)

for alpha in (0.1, 0.3, 0.6):
    sol = project_transform(extended_map("antiboost", alpha), src, t, xq)
    slope = np.polyfit(xq, sol.Theta_star, 1)[0]
    print(f"antiboost {alpha:.1f}: slope {slope:.12f} predicted {beta / (1 - 0.5 * alpha * beta):.12f}, "
          f"density {sol.R_star[0]:.12f} predicted {R0 * (1 - 0.5 * alpha * beta) ** 2:.12f}")

for delta in (-0.2, 0.2):
    sol = project_transform(extended_map("time_dilation", delta), src, t, xq)
    slope = np.polyfit(xq, sol.Theta_star, 1)[0]
    print(f"time dilation {delta:+.1f}: slope {slope:.12f} predicted {np.exp(delta) * beta:.12f}, "
          f"density {sol.R_star[0]:.12f} predicted {np.exp(-delta) * R0:.12f}")
