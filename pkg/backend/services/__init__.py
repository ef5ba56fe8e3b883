# Services: expériences aléatoires et rendu SVG
