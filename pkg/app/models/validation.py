"""
Modelos del reporte de validación
"""
from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


class CheckOutcome(BaseModel):
    """Resultado de un chequeo de la batería de oráculos"""

    model_config = ConfigDict(frozen=True)

    name: str
    status: CheckStatus
    detail: str = ""


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    checks: List[CheckOutcome]

    @property
    def passed(self) -> bool:
        """Ningún chequeo falla; los no concluyentes solo generan avisos"""
        return all(check.status is not CheckStatus.FAIL for check in self.checks)

    @property
    def failed(self) -> List[CheckOutcome]:
        return [check for check in self.checks if check.status is CheckStatus.FAIL]

    @property
    def inconclusive(self) -> List[CheckOutcome]:
        return [check for check in self.checks if check.status is CheckStatus.INCONCLUSIVE]

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "total": len(self.checks),
            "failed": [check.name for check in self.failed],
            "inconclusive": [check.name for check in self.inconclusive],
        }
