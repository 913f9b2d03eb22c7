"""Embedded glyph bitmaps.

Plate glyphs live on an 8 x 16 cell grid ('#' = ink). Every glyph is one
8-connected blob at least 12 rows tall, so a glyph survives segmentation as
a single component. The shapes are stylised stand-ins for the plate font,
not calligraphy.
"""

import numpy as np

GRID_W, GRID_H = 8, 16

_ART = {
    "d1": """
.####...
.####...
..###...
..###...
..###...
..###...
..###...
..###...
..###...
..###...
..###...
..###...
..###...
..###...
..###...
..###...""",
    "d2": """
##...##.
##...##.
##..##..
##.##...
####....
###.....
##......
##......
##......
##......
##......
##......
##......
##......
##......
##......""",
    "d3": """
##.##.##
##.##.##
##.##.##
########
#######.
##......
##......
##......
##......
##......
##......
##......
##......
##......
##......
##......""",
    "d4": """
...#####
..##....
.##.....
.##.....
..##....
...####.
..##....
.##.....
##......
##......
##......
.##.....
..######
..######""",
    "d5": """
........
..####..
.##..##.
##....##
##....##
##....##
##....##
##....##
##....##
##....##
##....##
##....##
##....##
.##..##.
..####..""",
    "d6": """
######..
######..
....##..
....##..
....##..
....##..
....##..
....##..
....##..
....##..
....##..
....##..
....##..
....##..
....##..
....##..""",
    "d7": """
##....##
##....##
##....##
.##..##.
.##..##.
.##..##.
.##..##.
..####..
..####..
..####..
...##...
...##...
...##...
...##...""",
    "d8": """
........
........
...##...
...##...
...##...
...##...
..####..
..####..
..####..
.##..##.
.##..##.
.##..##.
.##..##.
##....##
##....##
##....##""",
    "d9": """
.#####..
##...##.
##...##.
##...##.
##...##.
.######.
.....##.
.....##.
.....##.
.....##.
.....##.
.....##.
.....##.
.....##.
.....##.
.....##.""",
    "alef": """
##......
##.##...
.####...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...""",
    "beh": """
##....##
##....##
##....##
##....##
##....##
##....##
##....##
##....##
########
########
...##...
...##...
..####..
..####..""",
    "jeem": """
.######.
##......
##......
##......
##......
##......
#####...
#####...
##......
##......
##......
##......
##......
.######.""",
    "dal": """
...##...
....##..
.....##.
......##
......##
......##
......##
......##
......##
......##
########
########""",
    "reh": """
......##
......##
......##
......##
......##
.....##.
....##..
...##...
..##....
.##.....
##......
##......
##......""",
    "seen": """
##.##.##
##.##.##
##.##.##
##.##.##
##.##.##
##.##.##
########
########
......##
......##
......##
.....##.
..####..""",
    "sad": """
..######
.##...##
##....##
##....##
.#######
..######
.##.....
##......
##......
##......
.##.....
..###...""",
    "tah": """
##......
##......
##......
##......
##......
##......
########
##....##
##....##
##....##
########
########""",
    "ain": """
.######.
##....##
##......
.##.....
..######
.##.....
##......
##......
##......
##......
.##....#
..######""",
    "feh": """
..######
..##..##
..##..##
..######
......##
......##
......##
......##
......##
......##
########
########""",
    "qaf": """
....####
....####
......##
......##
##....##
##....##
##....##
##....##
##....##
##....##
##....##
.######.
..####..""",
    "lam": """
......##
......##
......##
......##
......##
......##
......##
......##
......##
......##
##....##
##....##
########
.######.""",
    "meem": """
.######.
.##..##.
.##..##.
.######.
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...
...##...""",
    "noon": """
..####..
..####..
...##...
...##...
########
########
##....##
##....##
##....##
##....##
##....##
##....##
##....##
##....##""",
    "heh": """
.######.
##....##
##....##
##....##
.######.
.######.
##....##
##....##
##....##
##....##
##....##
.######.""",
    "waw": """
...#####
...##.##
...#####
......##
......##
.....##.
....##..
...##...
..##....
.##.....
##......
##......""",
    "yeh": """
..######
.##.....
.##.....
..####..
.....##.
......##
......##
......##
##....##
##...##.
.#####..
..###...""",
}

# 3 x 5 blocky Latin font for the bottom subtitle
_LATIN = {
    "0": "### #.# #.# #.# ###", "1": ".#. ##. .#. .#. ###", "2": "### ..# ### #.. ###",
    "3": "### ..# ### ..# ###", "4": "#.# #.# ### ..# ..#", "5": "### #.. ### ..# ###",
    "6": "### #.. ### #.# ###", "7": "### ..# ..# ..# ..#", "8": "### #.# ### #.# ###",
    "9": "### #.# ### ..# ###", "A": "### #.# ### #.# #.#", "B": "##. #.# ##. #.# ##.",
    "C": "### #.. #.. #.. ###", "D": "##. #.# #.# #.# ##.", "E": "### #.. ### #.. ###",
    "F": "### #.. ### #.. #..", "G": "### #.. #.# #.# ###", "H": "#.# #.# ### #.# #.#",
    "K": "#.# ##. #.. ##. #.#", "L": "#.. #.. #.. #.. ###", "M": "#.# ### ### #.# #.#",
    "N": "##. #.# #.# #.# #.#", "R": "##. #.# ##. #.# #.#", "S": "### #.. ### ..# ###",
    "T": "### .#. .#. .#. .#.", "W": "#.# #.# ### ### #.#", "Y": "#.# #.# .#. .#. .#.",
}


def _parse(art, w, h):
    rows = [r for r in art.strip("\n").split("\n")]
    grid = np.zeros((h, w), dtype=bool)
    for y, row in enumerate(rows):
        if len(row) != w:
            raise ValueError(f"glyph row {row!r} is not {w} wide")
        grid[y] = [c == "#" for c in row]
    return grid


GLYPHS = {k: _parse(v, GRID_W, GRID_H) for k, v in _ART.items()}
LATIN = {k: _parse("\n".join(v.split()), 3, 5) for k, v in _LATIN.items()}


def glyph(sid):
    return GLYPHS[sid]


def latin(ch):
    return LATIN[ch]
