# One quadrupole-shift Ramsey scan with the product state, the way it is done
# in the lab: a wait scan, a damped-sinusoid fit, compare with the prediction.

from ionpair import analysis as an
from ionpair import scenarios as sc

scn = sc.load_scenario("fig3_quadrupole_product")
print(sc.describe("fig3_quadrupole_product"))

res = sc.run_scenario(scn, seed=1)
fit = res.extra["fit"]

print()
print("wait [ms]  parity   err")
for row in res.rows[:8]:
    print(f"{row[0] * 1e3:8.1f}  {row[1]:+.2f}  {row[2]:.2f}")
print("...")

# the first point is taken before the state has turned into a mixture, so the fit skips it
print()
print(f"fitted frequency  {fit['freq']:.2f} +/- {fit.err('freq'):.2f} Hz")
print(f"prediction        {res.report['analytic_freq']:.2f} Hz")
print(f"contrast          {fit['C0']:.2f} +/- {fit.err('C0'):.2f}")
print(f"decay rate        {fit['decay_rate']:.2f} +/- {fit.err('decay_rate'):.2f} /s"
      f"  (2/tau_D = {2 / 1.16:.2f})")

# projection noise, order of magnitude
print(f"rough projection-noise limit {an.projection_noise_sigma(0.1, 0.5, 5100):.3f} Hz")
