"""Check the relations published for four benchmarks against the ground truths.

    python demos/verify_printed.py
"""

from gsr.cli import verify_text

PRINTED = {
    "Nguyen-8": "0.83654*ln(y) = -0.032175*ln(x*x*x*x) + 0.54697*ln(x)",
    "Nguyen-10": "0.44721*y = 0.89442*sin(x1)*cos(x2)",
    "Nguyen-11": "0.70711*ln(y) = 0.70711*x2*ln(x1)",
    "SymSet-9": "0.83205*ln(y) = -0.5547*ln(x1 + x2 + x1)",
}

for name, text in PRINTED.items():
    out = verify_text(text, name)
    print(f"{name:10s} exact={out['exact']!s:5s} max rel. error {out['max_rel_error']:.1e}  "
          f"| ||w|| - 1 | printed {out['printed_norm_deviation']:.1e}, "
          f"refit {out['refit_norm_deviation']:.1e}")
    print(f"{'':10s} refit: {out['refit_expression']}")
