"""Lab Component Adapter

Adapts the study use cases to the Langflow component interface.
This is the bridge between Langflow and the application layer.
"""

import json
from typing import Any, Dict, Optional, Union

from lfx.schema import Data

from ....application.use_cases import USE_CASES
from ....domain.exceptions import ConfigError, MeasureLabError
from ....infrastructure.io.spec_loader import parse_config


class LabComponentAdapter:
    """Adapter for the lab Langflow components.

    Turns component inputs into an experiment config and runs one pipeline.
    """

    def __init__(self, command: str, jobs: int = 1):
        """Initialize adapter with the use case for command."""
        if command not in USE_CASES:
            raise ValueError(f"Unknown command: {command}")
        self.command = command
        self._use_case = USE_CASES[command].create(jobs=jobs)

    def run(
        self,
        config_data: Union[str, Dict[str, Any], None],
        out_dir: Optional[str] = None,
        base_dir: str = ".",
    ) -> Data:
        """Run the pipeline on a config given as JSON text or a dictionary.

        Args:
            config_data: Experiment configuration, None only for verify
            out_dir: Output directory, config.output_dir if omitted
            base_dir: Directory relative file references resolve against

        Returns:
            Langflow Data object with the report summary or the error
        """
        try:
            config = None
            if config_data:
                data = json.loads(config_data) if isinstance(config_data, str) else config_data
                config = parse_config(data, base_dir)
            result = self._use_case.execute(config, base_dir, out_dir or None)
        except json.JSONDecodeError as e:
            return Data(data={'success': False, 'error': f"JSON Parse Error: {e}"})
        except ConfigError as e:
            return Data(data={'success': False, 'error': f"Config Error: {e}"})
        except (MeasureLabError, OSError) as e:
            return Data(data={'success': False, 'error': str(e)})

        report = result.pop('report')
        result['report'] = report.model_dump(mode="json")
        return Data(data=result)

    @classmethod
    def create(cls, command: str, jobs: int = 1) -> "LabComponentAdapter":
        """Factory method to create adapter.

        Returns:
            Configured LabComponentAdapter instance
        """
        return cls(command, jobs)
