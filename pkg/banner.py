#!/usr/bin/env python3
"""ASCII art banner for BatteryCap."""

# ANSI color codes
RESET = "\033[0m"
BOLD = "\033[1m"
GREEN = "\033[92m"
YELLOW = "\033[93m"
RED = "\033[91m"
WHITE = "\033[97m"

TAGLINE = "Quantum Battery Capacity from Two-Photon Tomography"

GLYPHS = {
    "A": [" █████╗ ", "██╔══██╗", "███████║", "██╔══██║", "██║  ██║", "╚═╝  ╚═╝"],
    "B": ["██████╗ ", "██╔══██╗", "██████╔╝", "██╔══██╗", "██████╔╝", "╚═════╝ "],
    "C": [" ██████╗", "██╔════╝", "██║     ", "██║     ", "╚██████╗", " ╚═════╝"],
    "E": ["███████╗", "██╔════╝", "█████╗  ", "██╔══╝  ", "███████╗", "╚══════╝"],
    "P": ["██████╗ ", "██╔══██╗", "██████╔╝", "██╔═══╝ ", "██║     ", "╚═╝     "],
    "R": ["██████╗ ", "██╔══██╗", "██████╔╝", "██╔══██╗", "██║  ██║", "╚═╝  ╚═╝"],
    "T": ["████████╗", "╚══██╔══╝", "   ██║   ", "   ██║   ", "   ██║   ", "   ╚═╝   "],
    "Y": ["██╗   ██╗", "╚██╗ ██╔╝", " ╚████╔╝ ", "  ╚██╔╝  ", "   ██║   ", "   ╚═╝   "],
}

# Charge gradient, full at the top
ROW_COLORS = [GREEN, GREEN, YELLOW, YELLOW, RED, RED]


def get_banner_text(word: str = "BATTERYCAP") -> str:
    """Return the banner as a string (for use in help text, etc.)."""
    rows = ["".join(GLYPHS[letter][i] for letter in word) for i in range(len(ROW_COLORS))]
    inner = max(len(rows[0]), len(TAGLINE)) + 6
    blank = f"║{' ' * inner}║"

    lines = [f"{GREEN}╔{'═' * inner}╗", blank]
    for color, row in zip(ROW_COLORS, rows):
        lines.append(f"║   {color}{row}{GREEN}{' ' * (inner - len(row) - 3)}║")
    lines.append(blank)
    pad = inner - len(TAGLINE)
    lines.append(f"║{' ' * (pad // 2)}{WHITE}{TAGLINE}{GREEN}{' ' * (pad - pad // 2)}║")
    lines.append(blank)
    lines.append(f"╚{'═' * inner}╝{RESET}")
    return "\n".join(lines) + "\n"


def print_banner():
    """Print the BatteryCap ASCII art banner with a charge gradient."""
    print(get_banner_text())


if __name__ == "__main__":
    print_banner()
