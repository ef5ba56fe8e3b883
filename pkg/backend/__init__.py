from dotenv import load_dotenv

# Charge un éventuel .env à la racine avant la lecture de backend.config
load_dotenv()
