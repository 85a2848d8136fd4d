"""Admissibility Component

Langflow component deciding μ ∈ A(f) from the absorption integrals along the grid ladder.
"""

from lfx.custom.custom_component.component import Component
from lfx.io import StrInput, Output
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


class AdmissibleComponent(Component):
    """Admissibility Component

    Needs a ladder of at least three grids.
    """

    display_name: str = "Admissibility Check"
    description: str = "Decide whether f(·, G[μ]) stays integrable under refinement"
    icon: str = "check-circle"
    priority: int = 60
    name: str = "lab_admissible"

    inputs = [
        StrInput(
            name="config_json",
            display_name="Experiment Config (JSON)",
            info="Experiment config with at least three grids",
            required=True
        ),
        StrInput(
            name="out_dir",
            display_name="Output Directory",
            value="mplab_out/admissible",
            required=False
        ),
    ]

    outputs = [
        Output(name="admissible_output", display_name="Verdict", method="build_admissible"),
    ]

    def build_admissible(self) -> Data:
        """Run the admissibility study and return the verdict."""
        result = LabComponentAdapter.create("admissible").run(self.config_json, self.out_dir)
        study = (result.data.get('report') or {}).get('admissibility')
        if study is not None:
            self.status = (
                f"✓ {study['verdict']} (growth exponent {study['growth_exponent']:.3f})"
            )
        else:
            self.status = f"✗ {result.data.get('error')}"
        return result
