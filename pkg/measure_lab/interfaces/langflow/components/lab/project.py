"""Projection Component

Langflow component for Π_f(μ) = (μ⁺)* − (μ⁻)*, the largest good measure below μ.
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


class ProjectComponent(Component):
    """Projection Component

    Reduces the positive and negative parts of μ separately and checks the
    projection against its alternative characterizations.
    """

    display_name: str = "Good Measure Projection"
    description: str = "Project μ onto the good measures of f and check the projection identities"
    icon: str = "git-merge"
    priority: int = 70
    name: str = "lab_project"

    inputs = [
        StrInput(
            name="config_json",
            display_name="Experiment Config (JSON)",
            info="Experiment config with nonlinearity, measure and grids",
            required=True
        ),
        StrInput(
            name="out_dir",
            display_name="Output Directory",
            value="mplab_out/project",
            required=False
        ),
        IntInput(
            name="jobs",
            display_name="Jobs",
            value=1,
            required=False
        ),
    ]

    outputs = [
        Output(name="project_output", display_name="Projection Report", method="build_project"),
    ]

    def build_project(self) -> Data:
        """Run the projection pipeline and return the report."""
        result = LabComponentAdapter.create("project", self.jobs or 1).run(
            self.config_json, self.out_dir
        )
        if result.data.get('success'):
            rows = result.data['report']['invariants']
            self.status = f"✓ {result.data['message']} ({len(rows)} identity rows passed)"
        else:
            self.status = f"✗ {result.data.get('error')}"
        return result
