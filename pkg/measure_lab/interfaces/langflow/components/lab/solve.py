"""Solve Component

Langflow component for the discrete semilinear solve -Δ_h u = f(x, u) + μ on a grid ladder.
"""

from lfx.custom.custom_component.component import Component
from lfx.io import StrInput, IntInput, Output
from lfx.schema import Data
try:
    from measure_lab.interfaces.langflow.adapters.lab_component_adapter import LabComponentAdapter
except ImportError:
    import sys, os
    package_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))))
    if package_root not in sys.path:
        sys.path.insert(0, package_root)
    from measure_lab.interfaces.langflow.adapters.lab_component_adapter import LabComponentAdapter


class SolveComponent(Component):
    """Semilinear Solve Component

    Solves the discrete problem on every grid of the configured ladder.
    """

    display_name: str = "Semilinear Solve"
    description: str = "Solve -Δu = f(x,u) + μ with Newton's method on each grid of the ladder"
    icon: str = "sigma"
    priority: int = 90
    name: str = "lab_solve"

    inputs = [
        StrInput(
            name="config_json",
            display_name="Experiment Config (JSON)",
            info='Experiment config, e.g. {"nonlinearity": {"family": "power", "p": 3}, '
                 '"measure": {"atoms": [{"x": 0.5, "y": 0.5, "mass": 1.0}]}, "grids": [31, 63]}',
            required=True
        ),
        StrInput(
            name="out_dir",
            display_name="Output Directory",
            info="Directory for solutions, report.json and plots",
            value="mplab_out/solve",
            required=False
        ),
        IntInput(
            name="jobs",
            display_name="Jobs",
            info="Worker threads across grids",
            value=1,
            required=False
        ),
    ]

    outputs = [
        Output(name="solve_output", display_name="Solve Report", method="build_solve"),
    ]

    def build_solve(self) -> Data:
        """Run the solve pipeline and return the report."""
        result = LabComponentAdapter.create("solve", self.jobs or 1).run(
            self.config_json, self.out_dir
        )
        if result.data.get('success'):
            self.status = f"✓ {result.data['message']}"
        else:
            self.status = f"✗ {result.data.get('error')}"
        return result
