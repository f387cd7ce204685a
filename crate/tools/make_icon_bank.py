"""Draws the starter icon bank shipped in crates/core/assets/icons.

Each glyph is a 64x64 RGBA image with a transparent background. Running the
script rewrites the PNGs and manifest.json in place.
"""

import json
import math
import os

from PIL import Image, ImageDraw

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "assets", "icons")
S = 64
INK = (33, 33, 33, 255)
W = 5


def canvas():
    img = Image.new("RGBA", (S, S), (0, 0, 0, 0))
    return img, ImageDraw.Draw(img)


def arrow(d, angle):
    cx = cy = S / 2
    r = 22
    dx, dy = math.cos(angle), math.sin(angle)
    tip = (cx + dx * r, cy + dy * r)
    tail = (cx - dx * r, cy - dy * r)
    d.line([tail, tip], fill=INK, width=W)
    for side in (1, -1):
        a = angle + math.pi + side * 0.7
        d.line([tip, (tip[0] + math.cos(a) * 14, tip[1] + math.sin(a) * 14)], fill=INK, width=W)


def chevron(d, angle):
    cx = cy = S / 2
    tip = (cx + math.cos(angle) * 10, cy + math.sin(angle) * 10)
    for side in (1, -1):
        a = angle + math.pi + side * 0.8
        d.line([tip, (tip[0] + math.cos(a) * 22, tip[1] + math.sin(a) * 22)], fill=INK, width=W + 1)


def star(d, points=5, filled=True):
    pts = []
    for i in range(points * 2):
        r = 26 if i % 2 == 0 else 11
        a = -math.pi / 2 + i * math.pi / points
        pts.append((32 + r * math.cos(a), 33 + r * math.sin(a)))
    if filled:
        d.polygon(pts, fill=INK)
    else:
        d.line(pts + [pts[0]], fill=INK, width=3)


def gear(d):
    for i in range(8):
        a = i * math.pi / 4
        d.line([(32 + 16 * math.cos(a), 32 + 16 * math.sin(a)), (32 + 27 * math.cos(a), 32 + 27 * math.sin(a))], fill=INK, width=8)
    d.ellipse([12, 12, 52, 52], outline=INK, width=8)
    d.ellipse([25, 25, 39, 39], fill=INK)


ICONS = []


def icon(name, description):
    def wrap(fn):
        ICONS.append((name, description, fn))
        return fn
    return wrap


@icon("magnifier", "search")
def _(d):
    d.ellipse([8, 8, 40, 40], outline=INK, width=W)
    d.line([(36, 36), (56, 56)], fill=INK, width=W + 2)


@icon("house", "go to the home page")
def _(d):
    d.polygon([(32, 6), (58, 30), (6, 30)], outline=INK, fill=None, width=W)
    d.rectangle([14, 30, 50, 56], outline=INK, width=W)
    d.rectangle([27, 40, 37, 56], fill=INK)


@icon("plus", "add a new item")
def _(d):
    d.line([(32, 8), (32, 56)], fill=INK, width=W + 2)
    d.line([(8, 32), (56, 32)], fill=INK, width=W + 2)


@icon("minus", "remove or decrease")
def _(d):
    d.line([(8, 32), (56, 32)], fill=INK, width=W + 2)


@icon("close", "close or dismiss")
def _(d):
    d.line([(12, 12), (52, 52)], fill=INK, width=W + 2)
    d.line([(52, 12), (12, 52)], fill=INK, width=W + 2)


@icon("check", "confirm or mark as done")
def _(d):
    d.line([(8, 34), (26, 52), (56, 14)], fill=INK, width=W + 2, joint="curve")


@icon("arrow-right", "next or go forward")
def _(d):
    arrow(d, 0)


@icon("arrow-left", "back or go to the previous page")
def _(d):
    arrow(d, math.pi)


@icon("arrow-up", "move up or scroll to the top")
def _(d):
    arrow(d, -math.pi / 2)


@icon("arrow-down", "move down or scroll down")
def _(d):
    arrow(d, math.pi / 2)


@icon("chevron-right", "expand or show more to the right")
def _(d):
    chevron(d, 0)


@icon("chevron-left", "collapse or go left")
def _(d):
    chevron(d, math.pi)


@icon("chevron-up", "collapse the section")
def _(d):
    chevron(d, -math.pi / 2)


@icon("chevron-down", "open a dropdown menu")
def _(d):
    chevron(d, math.pi / 2)


@icon("hamburger", "open the navigation menu")
def _(d):
    for y in (16, 32, 48):
        d.line([(8, y), (56, y)], fill=INK, width=W + 1)


@icon("kebab", "more options")
def _(d):
    for y in (14, 32, 50):
        d.ellipse([27, y - 5, 37, y + 5], fill=INK)


@icon("meatballs", "show additional actions")
def _(d):
    for x in (14, 32, 50):
        d.ellipse([x - 5, 27, x + 5, 37], fill=INK)


@icon("user", "user account or profile")
def _(d):
    d.ellipse([20, 6, 44, 30], outline=INK, width=W)
    d.arc([8, 34, 56, 82], 180, 360, fill=INK, width=W)


@icon("envelope", "email or messages")
def _(d):
    d.rectangle([6, 14, 58, 50], outline=INK, width=W)
    d.line([(6, 14), (32, 36), (58, 14)], fill=INK, width=W)


@icon("lock", "locked or secure")
def _(d):
    d.arc([18, 6, 46, 38], 180, 360, fill=INK, width=W)
    d.line([(18, 22), (18, 30)], fill=INK, width=W)
    d.line([(46, 22), (46, 30)], fill=INK, width=W)
    d.rectangle([12, 28, 52, 58], fill=INK)


@icon("star", "add to favorites")
def _(d):
    star(d)


@icon("star-outline", "rate or bookmark")
def _(d):
    star(d, filled=False)


@icon("heart", "like")
def _(d):
    d.ellipse([8, 12, 34, 38], fill=INK)
    d.ellipse([30, 12, 56, 38], fill=INK)
    d.polygon([(9, 30), (55, 30), (32, 56)], fill=INK)


@icon("play", "play media")
def _(d):
    d.polygon([(18, 10), (54, 32), (18, 54)], fill=INK)


@icon("pause", "pause playback")
def _(d):
    d.rectangle([16, 10, 27, 54], fill=INK)
    d.rectangle([37, 10, 48, 54], fill=INK)


@icon("stop", "stop playback")
def _(d):
    d.rectangle([14, 14, 50, 50], fill=INK)


@icon("gear", "settings")
def _(d):
    gear(d)


@icon("bell", "notifications")
def _(d):
    d.chord([14, 8, 50, 52], 180, 360, fill=INK)
    d.rectangle([14, 29, 50, 44], fill=INK)
    d.line([(8, 46), (56, 46)], fill=INK, width=W)
    d.ellipse([27, 48, 37, 58], fill=INK)


@icon("trash", "delete")
def _(d):
    d.line([(8, 14), (56, 14)], fill=INK, width=W)
    d.rectangle([24, 6, 40, 14], outline=INK, width=3)
    d.polygon([(14, 18), (50, 18), (46, 58), (18, 58)], outline=INK, width=W)


@icon("pencil", "edit")
def _(d):
    d.line([(14, 50), (50, 14)], fill=INK, width=10)
    d.polygon([(8, 56), (12, 44), (20, 52)], fill=INK)


@icon("download", "download a file")
def _(d):
    d.line([(32, 6), (32, 40)], fill=INK, width=W)
    d.line([(20, 28), (32, 40), (44, 28)], fill=INK, width=W)
    d.line([(8, 54), (56, 54)], fill=INK, width=W)


@icon("upload", "upload a file")
def _(d):
    d.line([(32, 40), (32, 6)], fill=INK, width=W)
    d.line([(20, 18), (32, 6), (44, 18)], fill=INK, width=W)
    d.line([(8, 54), (56, 54)], fill=INK, width=W)


@icon("share", "share")
def _(d):
    for box in ([40, 4, 58, 22], [6, 23, 24, 41], [40, 42, 58, 60]):
        d.ellipse(box, fill=INK)
    d.line([(49, 13), (15, 32), (49, 51)], fill=INK, width=4)


@icon("cart", "shopping cart")
def _(d):
    d.line([(4, 10), (14, 10), (20, 42), (52, 42), (58, 18), (17, 18)], fill=INK, width=W)
    d.ellipse([18, 48, 28, 58], fill=INK)
    d.ellipse([44, 48, 54, 58], fill=INK)


@icon("calendar", "calendar or choose a date")
def _(d):
    d.rectangle([8, 12, 56, 56], outline=INK, width=W)
    d.rectangle([8, 12, 56, 24], fill=INK)
    d.line([(20, 6), (20, 16)], fill=INK, width=W)
    d.line([(44, 6), (44, 16)], fill=INK, width=W)


@icon("clock", "time or history")
def _(d):
    d.ellipse([6, 6, 58, 58], outline=INK, width=W)
    d.line([(32, 14), (32, 32), (46, 40)], fill=INK, width=W)


@icon("globe", "language or region")
def _(d):
    d.ellipse([6, 6, 58, 58], outline=INK, width=4)
    d.ellipse([20, 6, 44, 58], outline=INK, width=3)
    d.line([(6, 32), (58, 32)], fill=INK, width=3)


@icon("info", "information")
def _(d):
    d.ellipse([6, 6, 58, 58], outline=INK, width=W)
    d.ellipse([28, 14, 36, 22], fill=INK)
    d.line([(32, 28), (32, 48)], fill=INK, width=W + 1)


@icon("warning", "warning")
def _(d):
    d.polygon([(32, 6), (60, 56), (4, 56)], outline=INK, width=W)
    d.line([(32, 22), (32, 40)], fill=INK, width=W)
    d.ellipse([29, 45, 35, 51], fill=INK)


@icon("question", "help")
def _(d):
    d.ellipse([6, 6, 58, 58], outline=INK, width=W)
    d.arc([22, 14, 42, 34], 200, 90, fill=INK, width=W)
    d.line([(32, 34), (32, 40)], fill=INK, width=W)
    d.ellipse([29, 45, 35, 51], fill=INK)


@icon("refresh", "reload the page")
def _(d):
    d.arc([8, 8, 56, 56], 30, 330, fill=INK, width=W)
    d.polygon([(46, 4), (58, 20), (40, 22)], fill=INK)


@icon("filter", "filter results")
def _(d):
    d.polygon([(6, 8), (58, 8), (38, 32), (38, 54), (26, 58), (26, 32)], fill=INK)


@icon("sort", "sort the list")
def _(d):
    d.line([(20, 8), (20, 56)], fill=INK, width=W)
    d.line([(10, 18), (20, 8), (30, 18)], fill=INK, width=W)
    d.line([(44, 8), (44, 56)], fill=INK, width=W)
    d.line([(34, 46), (44, 56), (54, 46)], fill=INK, width=W)


@icon("grid", "grid view")
def _(d):
    for x in (8, 36):
        for y in (8, 36):
            d.rectangle([x, y, x + 20, y + 20], fill=INK)


@icon("list", "list view")
def _(d):
    for y in (14, 32, 50):
        d.ellipse([6, y - 4, 14, y + 4], fill=INK)
        d.line([(20, y), (58, y)], fill=INK, width=W)


@icon("camera", "take a photo")
def _(d):
    d.rectangle([4, 18, 60, 54], outline=INK, width=W)
    d.rectangle([20, 10, 40, 18], fill=INK)
    d.ellipse([20, 24, 44, 48], outline=INK, width=W)


@icon("microphone", "voice search")
def _(d):
    d.rounded_rectangle([22, 4, 42, 38], radius=10, fill=INK)
    d.arc([12, 16, 52, 48], 0, 180, fill=INK, width=4)
    d.line([(32, 48), (32, 58)], fill=INK, width=4)


@icon("link", "copy link")
def _(d):
    d.rounded_rectangle([4, 22, 36, 42], radius=10, outline=INK, width=W)
    d.rounded_rectangle([28, 22, 60, 42], radius=10, outline=INK, width=W)


@icon("phone", "call")
def _(d):
    d.rounded_rectangle([18, 4, 46, 60], radius=6, outline=INK, width=W)
    d.ellipse([29, 49, 35, 55], fill=INK)


@icon("location-pin", "location or map")
def _(d):
    d.ellipse([14, 4, 50, 40], fill=INK)
    d.polygon([(16, 30), (48, 30), (32, 60)], fill=INK)
    d.ellipse([26, 16, 38, 28], fill=(0, 0, 0, 0))


def main():
    os.makedirs(OUT, exist_ok=True)
    manifest = []
    for name, description, draw in ICONS:
        img, d = canvas()
        draw(d)
        fname = f"{name}.png"
        img.save(os.path.join(OUT, fname), optimize=True)
        manifest.append({"name": name, "file": fname, "description": description})
    assert len(manifest) == 50, len(manifest)
    with open(os.path.join(OUT, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
