"""Line search over theta1 (theta2 = theta1) for the 8-level decoder."""

from spikebp import CodeSource, DecoderConfig, ScnuConfig, SimConfig, SweepConfig, sweep_theta1

base = SimConfig(
    CodeSource(n=1500, dv=3, dc=15, seed=1),
    DecoderConfig("ml-elena", scnu=ScnuConfig(levels=8)),
    (2.8,),
    min_bit_errors=10**9,
    max_codewords=64,
)
sweep = SweepConfig(base, design_ebn0_db=2.8, theta1_grid=(0.1, 0.3, 0.5, 0.7, 1.0, 1.5, 2.5, 4.0), levels=8)
res = sweep_theta1(sweep)
for t1, p in zip(res.theta1, res.points):
    mark = "  <- best" if t1 == res.best_theta1 else ""
    print(f"theta1={t1:4.1f}  ber={p.ber:.3e}{mark}")
