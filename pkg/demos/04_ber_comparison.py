"""BER of NMS, ELENA and the 16-level decoder on a (1500,3,15) code.

Short run; pass a larger max_codewords for smoother numbers.
"""

from spikebp import CodeSource, DecoderConfig, ScnuConfig, SimConfig, run_curve

code = CodeSource(n=1500, dv=3, dc=15, seed=1)
grid = (2.5, 3.0)
decoders = {
    "NMS 0.75": (DecoderConfig("nms", nms_lambda=0.75), None),
    "ELENA 1.5": (DecoderConfig("elena", scnu=ScnuConfig(levels=1, theta1=1.5, theta2=1.5)), 2.8),
    "ML16 0.7": (DecoderConfig("ml-elena", scnu=ScnuConfig(levels=16, theta1=0.7, theta2=0.7)), 2.8),
}

for name, (decoder, design) in decoders.items():
    sim = SimConfig(code, decoder, grid, design_ebn0_db=design, min_bit_errors=200, max_codewords=256)
    for p in run_curve(sim):
        print(f"{name:10s} {p.ebn0_db:.1f} dB  ber={p.ber:.3e}  [{p.wilson_low:.2e}, {p.wilson_high:.2e}]")
