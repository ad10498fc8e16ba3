"""When is a test worth ordering before choosing?"""
import numpy as np

from robustdecide import make_problem, run_pipeline
from robustdecide.core import InformationAction

# Two treatments; which is better depends on which belief vertex is right.
U = [[1.0, 0.0], [0.0, 1.0]]
B = [[0.9, 0.1], [0.1, 0.9]]
scan = InformationAction("scan", cost=0.2, findings=("low", "high"),
                         retained=((0,), (1,)), likelihood=np.eye(2))
for cost in (0.2, 1.5):
    u = InformationAction(scan.id, cost, scan.findings, scan.retained, scan.likelihood)
    out = run_pipeline(make_problem(U, B, action_ids=["drugA", "drugB"], info_actions=(u,)))
    rec = out.recommendation
    print(f"cost {cost}: {rec.kind} {rec.info_action or ''} impacts={out.voi.impacts}")
