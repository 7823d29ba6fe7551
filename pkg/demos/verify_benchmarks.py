"""Check the three manufactured benchmarks against a finite-difference oracle.

Each benchmark bundles exact piecewise solutions with the matching source,
boundary, and jump data.  verify_manufactured re-derives the PDE residual,
the solution jump, the conormal flux jump, and the stored gradients from the
exact values alone, so a sign slip or missing term in any formula shows up
as a nonzero defect here rather than as a mysteriously bad training run.
"""

from dnlearn.problems import problem_by_name, verify_manufactured

for name in ("circle", "zigzag", "checkerboard"):
    for c1, c2 in ((1.0, 1.0), (1.0, 1000.0)):
        problem = problem_by_name(name, c1, c2)
        report = verify_manufactured(problem)
        status = "ok" if report.passed else "FAILED"
        print(f"{name:13s} c=({c1:g},{c2:g})  residual {report.max_residual:.2e}  "
              f"jump {report.max_jump:.2e}  flux {report.max_flux:.2e}  {status}")
        if not report.passed:
            print(f"  worst residual at {report.residual_at}")

print()
print("All defects above are measured, not assumed: the residual uses a")
print("second-order stencil on the exact solution, and the flux jump is")
print("evaluated with the stored normals at sampled interface points.")
