"""
Réglages du processus, lus une fois depuis l'environnement (voir .env).

Les tolérances numériques ne sont PAS ici: elles voyagent avec chaque scène
(geometry.Tolerances).
"""
from __future__ import annotations

import os

# 🔭 Oracle par lancer de rayons
ORACLE_SAMPLES = int(os.getenv("CPOLY_ORACLE_SAMPLES", "8192"))
ORACLE_TAU = float(os.getenv("CPOLY_ORACLE_TAU", "0.02"))
ORACLE_LEVELS = int(os.getenv("CPOLY_ORACLE_LEVELS", "3"))
ORACLE_WINDOW = int(os.getenv("CPOLY_ORACLE_WINDOW", "4"))
ORACLE_RATIO = float(os.getenv("CPOLY_ORACLE_RATIO", "0.6"))
ORACLE_DEDUP = float(os.getenv("CPOLY_ORACLE_DEDUP", "1e-4"))

# 🧪 Expériences
MATCH_TOL = float(os.getenv("CPOLY_MATCH_TOL", "1e-6"))
MAX_RETRIES = int(os.getenv("CPOLY_MAX_RETRIES", "1000"))
WORKERS = int(os.getenv("CPOLY_WORKERS", "1"))

LOG_LEVEL = os.getenv("CPOLY_LOG_LEVEL", "INFO").upper()
