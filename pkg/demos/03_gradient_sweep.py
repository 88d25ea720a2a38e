# Frequency vs field gradient for the product and the Bell state. The slope is
# the quadrupole coefficient; the entangled state gets a tighter error bar
# because its contrast is twice as large and it can be probed for longer.

from ionpair import scenarios as sc

print(sc.describe("fig4_quadrupole_sweep"))
print()

for name in ("fig4_quadrupole_sweep_product", "fig4_quadrupole_sweep_bell"):
    res = sc.run_scenario(sc.load_scenario(name), seed=1)
    print(name)
    for p in res.report["points"]:
        f = p["fit"]
        print(f"  E' = {p['gradient']:6.2f} V/mm^2   nu = {f['params']['freq']:8.3f}"
              f" +/- {f['stderrs']['freq']:.3f} Hz   (expected {p['analytic_freq']:.3f})")
    line = res.extra["line"]
    print(f"  alpha = {line['alpha']:.4f} +/- {line.err('alpha'):.4f} Hz/(V/mm^2),"
          f" offset {line['offset']:+.3f} Hz")
    print()
