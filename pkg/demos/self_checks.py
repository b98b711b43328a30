"""Self-checks: identities, brute-force oracles and the regret bounds.

Prints the same table as `ctonline verify`, then shows the quadratic
variation check catching a covariance with the wrong sign.
Run: python demos/self_checks.py  (about half a minute)
"""

from ctonline import verify
from ctonline.bandit import estimator_covariance

results = verify.run_verify_suite(seed=0)
print(verify.format_summary(results))
print("all passed:", all(r.passed for r in results))

print("\nsame check with Sigma negated:")
bad = verify.quadratic_variation_suite("bandit", n_cases=1000, covariance=lambda r, p: -estimator_covariance(r, p))
print(verify.format_summary(bad))
