# Measuring the laser linewidth with two ions whose field sensitivities cancel.
# The protocol phase is randomized every shot, so single-ion signals are flat and
# only the laser-sensitive parity fringe survives.

from ionpair import analysis as an
from ionpair import scenarios as sc

res = sc.run_scenario(sc.load_scenario("fig7_linewidth"), seed=1)

print("wait [ms]  contrast")
for c in res.report["contrast"]:
    p, e = c["fit"]["params"], c["fit"]["stderrs"]
    print(f"{c['wait'] * 1e3:8.2f}   {p['contrast']:.3f} +/- {e['contrast']:.3f}")

g = res.extra["gauss"]
print()
print(f"Gaussian half-width  {g['tau_half'] * 1e3:.2f} +/- {g.err('tau_half') * 1e3:.2f} ms")
print(f"laser FWHM           {an.linewidth_from_tau_half(g['tau_half']):.1f} Hz (simulated 48 Hz)")
print(f"largest single-ion deviation {res.report['single_ion_max_deviation']:.3f}"
      f" (4/sqrt(N) = {res.report['single_ion_bound']:.3f})")

# same data as files: ionpair run fig7_linewidth --out out/
