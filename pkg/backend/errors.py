"""
Hiérarchie d'exceptions du moteur de C-polygones.

Chaque classe porte le code de sortie utilisé par la CLI:
    2 → scène impropre, 3 → géométrie dégénérée, 4 → violation de la théorie
    (par définition un bug d'implémentation).
"""
from __future__ import annotations


class CPolygonError(Exception):
    """Racine de toutes les erreurs métier."""

    exit_code: int = 1


class ImproperIntersection(CPolygonError):
    """Intersection vide ou non réduite (ex: disque dupliqué)."""

    exit_code = 2


class NotProper(CPolygonError):
    """La scène ne vérifie pas la précondition `check_proper = proper`."""

    exit_code = 2

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NoInterior(CPolygonError):
    exit_code = 2


class UnsupportedScene(CPolygonError):
    """Scène hors du régime du moteur (corps non strictement convexes...)."""

    exit_code = 2


class AntipodalConditionFailed(CPolygonError):
    exit_code = 2


class DegenerateGeometry(CPolygonError):
    """Tangence, sommets confondus, trois bords par un même point."""

    exit_code = 3


class ModelViolation(CPolygonError):
    """Plus de deux croisements entre deux bords, alternance cassée.

    Signale une entrée non strictement convexe ou un échec de tolérance.
    """

    exit_code = 3


class GenerationExhausted(CPolygonError):
    exit_code = 3


class SmoothingFailed(CPolygonError):
    exit_code = 3


class TheoryViolation(CPolygonError):
    """Une propriété démontrée est fausse à l'exécution: bug d'implémentation."""

    exit_code = 4
