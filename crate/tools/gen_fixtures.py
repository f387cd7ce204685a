"""Writes the fixture page corpus under crates/core/tests/fixtures/pages.

Every page is declared as a node tree. Nodes that should become annotation
units carry a hand-written `expect=(kind, description, source)`; the golden
annotation.json is assembled from those declarations alone (document order,
bbox = rect clamped to the viewport), so it does not depend on the
annotator under test.

Each page directory gets snapshot.json, screenshot.png, annotation.json and,
for non-default captures, capture.json. INDEX.json records node and element
counts per page.
"""

import hashlib
import io
import json
import os

from PIL import Image, ImageDraw

ROOT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures", "pages")

INTERACTIVE = {"Link", "Button", "Input"}
FILL = {
    "a": (219, 232, 252),
    "button": (230, 230, 230),
    "input": (250, 250, 250),
    "textarea": (250, 250, 250),
    "select": (245, 245, 245),
    "img": (180, 200, 170),
    "svg": (90, 90, 90),
    "canvas": (200, 180, 160),
    "picture": (170, 190, 210),
    "pre": (240, 240, 235),
    "code": (240, 240, 235),
}


class N:
    def __init__(self, tag, rect=None, text="", attrs=None, role="", style=None,
                 occluded=False, children=(), expect=None):
        self.tag = tag
        self.rect = rect
        self.text = text
        self.attrs = attrs or {}
        self.role = role
        self.style = dict(display="block", visibility="visible", opacity=1.0,
                          cursor="auto", position="static", overflow_clipped=False)
        self.style.update(style or {})
        self.occluded = occluded
        self.children = list(children)
        self.expect = expect


class Page:
    def __init__(self, name, url, title, viewport, body, meta="", scroll=(0.0, 0.0),
                 capture=None, page_height=None):
        self.name = name
        self.url = url
        self.title = title
        self.meta = meta
        self.viewport = viewport
        self.scroll = scroll
        self.capture = capture
        w, h = viewport
        ph = page_height or h
        self.root = N("html", (0, -scroll[1], w, ph - scroll[1]), children=[
            N("head", None),
            N("body", (0, -scroll[1], w, ph - scroll[1]), children=body),
        ])


def flatten(page):
    out = []

    def go(node, parent):
        nid = len(out)
        out.append((nid, parent, node))
        for c in node.children:
            go(c, nid)

    go(page.root, None)
    return out


def rect_json(r):
    if r is None:
        return None
    return {"x1": float(r[0]), "y1": float(r[1]), "x2": float(r[2]), "y2": float(r[3])}


def snapshot_doc(page, nodes):
    w, h = page.viewport
    return {
        "url": page.url,
        "title": page.title,
        "meta_description": page.meta,
        "viewport": {"width": w, "height": h, "dpr": 1.0},
        "scroll": {"x": float(page.scroll[0]), "y": float(page.scroll[1])},
        "nodes": [
            {
                "id": nid,
                "parent": parent,
                "tag": n.tag,
                "role": n.role,
                "attrs": n.attrs,
                "text": n.text,
                "rect": rect_json(n.rect),
                "style": n.style,
                "occluded": n.occluded,
            }
            for nid, parent, n in nodes
        ],
    }


def render(page, nodes):
    w, h = page.viewport
    img = Image.new("RGBA", (w, h), (255, 255, 255, 255))
    d = ImageDraw.Draw(img)
    for _, _, n in nodes:
        if n.rect is None or n.tag in ("html", "body"):
            continue
        if n.style["display"] == "none" or n.style["visibility"] == "hidden" or n.style["opacity"] < 0.5:
            continue
        if n.style["overflow_clipped"]:
            continue
        x1, y1, x2, y2 = n.rect
        fill = FILL.get(n.tag)
        if fill:
            d.rectangle([x1, y1, x2 - 1, y2 - 1], fill=fill + (255,), outline=(160, 160, 160, 255))
        label = n.text.strip() or n.attrs.get("value", "")
        if label:
            d.text((x1 + 2, y1 + 2), " ".join(label.split()), fill=(20, 20, 20, 255))
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def clamp(r, w, h):
    return (max(r[0], 0), max(r[1], 0), min(r[2], w), min(r[3], h))


def golden(page, nodes, png):
    w, h = page.viewport
    elements = []
    for nid, _, n in nodes:
        if n.expect is None:
            continue
        kind, desc, source = n.expect
        elements.append({
            "node_id": nid,
            "kind": kind,
            "bbox": rect_json(clamp(n.rect, w, h)),
            "description": desc,
            "description_source": source,
            "interactive": kind in INTERACTIVE,
        })
    return {
        "snapshot": "snapshot.json",
        "screenshot": "images/%s.png" % hashlib.sha256(png).hexdigest(),
        "url": page.url,
        "viewport": {"width": w, "height": h, "dpr": 1.0},
        "scroll_y": float(page.scroll[1]),
        "capture_index": page.capture["capture_index"] if page.capture else 0,
        "title": page.title,
        "meta_description": page.meta,
        "elements": elements,
    }


def txt(tag, rect, text, **kw):
    return N(tag, rect, text=text, expect=("Text", " ".join(text.split()), "visible-text"), **kw)


# --- pages -----------------------------------------------------------------

def google_home():
    return Page("google_home", "https://www.google.com/", "Google", (1280, 720),
                meta="Search the world's information, including webpages, images, videos and more.",
                body=[
        N("header", (0, 0, 1280, 60), children=[
            N("a", (1020, 18, 1062, 42), text="Gmail", attrs={"href": "https://mail.google.com/"},
              expect=("Link", "Gmail", "visible-text")),
            N("a", (1078, 18, 1128, 42), text="Images", attrs={"href": "/imghp"},
              expect=("Link", "Images", "visible-text")),
            N("a", (1140, 16, 1172, 48), attrs={"href": "/apps", "aria-label": "Google apps"},
              role="button", expect=("Link", "Google apps", "aria-label"), children=[
                  N("svg", (1144, 20, 1168, 44)),
              ]),
            N("a", (1184, 14, 1264, 50), attrs={"href": "/signin"}, expect=("Link", "Sign in", "visible-text"),
              children=[N("span", (1196, 22, 1252, 42), text="Sign in")]),
        ]),
        N("main", (0, 60, 1280, 600), children=[
            N("img", (504, 160, 776, 252), attrs={"alt": "Google", "src": "/logo.png"},
              expect=("Image", "Google", "alt")),
            N("form", (340, 290, 940, 440), children=[
                N("div", (340, 290, 940, 336), children=[
                    N("span", (356, 302, 376, 322), children=[N("svg", (356, 302, 376, 322),
                                                                expect=("Icon", "", "none"))]),
                    N("textarea", (390, 298, 860, 328), attrs={"aria-label": "Search", "title": "Search"},
                      expect=("Input", "Search", "aria-label")),
                    N("div", (870, 300, 896, 326), role="button", attrs={"aria-label": "Search by voice"},
                      style={"cursor": "pointer"}, expect=("Button", "Search by voice", "aria-label"),
                      children=[N("svg", (874, 304, 892, 322))]),
                    N("div", (904, 300, 930, 326), role="button", attrs={"aria-label": "Search by image"},
                      style={"cursor": "pointer"}, expect=("Button", "Search by image", "aria-label"),
                      children=[N("img", (906, 302, 928, 324), attrs={"alt": "Camera"})]),
                ]),
                N("center", (340, 370, 940, 410), children=[
                    N("input", (494, 372, 634, 408), attrs={"type": "submit", "value": "Google Search",
                                                             "aria-label": "Google Search"},
                      expect=("Button", "Google Search", "aria-label")),
                    N("input", (646, 372, 786, 408), attrs={"type": "submit", "value": "I'm Feeling Lucky",
                                                             "aria-label": "I'm Feeling Lucky"},
                      expect=("Button", "I'm Feeling Lucky", "aria-label")),
                ]),
            ]),
            N("div", (440, 450, 840, 474), children=[
                txt("span", (470, 452, 600, 472), "Google offered in:"),
                N("a", (606, 452, 660, 472), text="Français", attrs={"href": "/fr"},
                  expect=("Link", "Français", "visible-text")),
                N("a", (666, 452, 724, 472), text="Deutsch", attrs={"href": "/de"},
                  expect=("Link", "Deutsch", "visible-text")),
            ]),
        ]),
        N("footer", (0, 660, 1280, 720), children=[
            txt("div", (30, 666, 120, 686), "Germany"),
            N("a", (30, 692, 110, 714), text="Advertising", attrs={"href": "/ads"},
              expect=("Link", "Advertising", "visible-text")),
            N("a", (124, 692, 190, 714), text="Business", attrs={"href": "/biz"},
              expect=("Link", "Business", "visible-text")),
            N("a", (204, 692, 318, 714), text="How Search works", attrs={"href": "/how"},
              expect=("Link", "How Search works", "visible-text")),
            N("a", (1120, 692, 1180, 714), text="Privacy", attrs={"href": "/privacy"},
              expect=("Link", "Privacy", "visible-text")),
            N("a", (1194, 692, 1250, 714), text="Terms", attrs={"href": "/terms"},
              expect=("Link", "Terms", "visible-text")),
            N("script", None, text="var x = 1;", style={"display": "none"}),
        ]),
    ])


def hidden_everything():
    return Page("hidden_everything", "https://fixtures.test/hidden", "Nothing to see", (800, 600), body=[
        N("div", (0, 0, 800, 100), text="display none", style={"display": "none"}, children=[
            N("a", (10, 10, 100, 30), text="Inner link", style={"display": "block"}),
        ]),
        N("p", (0, 100, 800, 140), text="visibility hidden", style={"visibility": "hidden"}),
        N("p", (0, 140, 800, 180), text="transparent", style={"opacity": 0.0}),
        N("p", (0, 180, 800, 220), text="clipped away", style={"overflow_clipped": True}),
        N("p", (0, 220, 800, 260), text="covered", occluded=True),
        N("p", (0, -200, 800, -160), text="above the fold"),
        N("p", (0, 700, 800, 740), text="below the fold"),
        N("p", None, text="zero area"),
        N("p", (10, 300, 12, 340), text="too thin"),
        N("img", (100, 400, 300, 500), attrs={"alt": "hidden image"}, style={"visibility": "hidden"}),
    ])


def button_icon_text():
    return Page("button_icon_text", "https://fixtures.test/button", "Button", (640, 360), body=[
        N("button", (200, 150, 320, 190), attrs={"type": "submit"}, expect=("Button", "Search", "visible-text"),
          children=[
              N("svg", (210, 160, 230, 180)),
              N("span", (236, 160, 300, 180), text="Search"),
          ]),
    ])


def opacity_chain():
    return Page("opacity_chain", "https://fixtures.test/opacity", "Opacity", (800, 600), body=[
        N("div", (0, 0, 800, 200), style={"opacity": 0.2}, children=[
            N("div", (0, 0, 800, 200), style={"opacity": 0.2}, children=[
                N("p", (20, 20, 400, 50), text="faded to four percent"),
            ]),
        ]),
        N("div", (0, 200, 800, 400), style={"opacity": 0.5}, children=[
            N("div", (0, 200, 800, 400), style={"opacity": 0.5}, children=[
                txt("p", (20, 220, 400, 250), "a quarter visible"),
            ]),
        ]),
        N("div", (0, 400, 800, 600), style={"opacity": 0.05}, children=[
            N("a", (20, 420, 200, 450), text="exactly at the floor", attrs={"href": "#"}),
        ]),
        N("div", (400, 400, 800, 600), style={"opacity": 0.06}, children=[
            N("a", (420, 420, 600, 450), text="just above the floor", attrs={"href": "#"},
              expect=("Link", "just above the floor", "visible-text")),
        ]),
    ])


def overflow_clipping():
    return Page("overflow_clipping", "https://fixtures.test/overflow", "Overflow", (800, 600), body=[
        N("div", (50, 50, 350, 150), style={"position": "relative"}, children=[
            txt("p", (60, 60, 340, 90), "inside the box"),
            N("p", (400, 60, 700, 90), text="scrolled out of the box", style={"overflow_clipped": True}),
        ]),
        N("ul", (50, 200, 350, 260), children=[
            N("li", (50, 200, 350, 230), children=[
                N("a", (60, 204, 200, 226), text="First tab", attrs={"href": "#1"},
                  expect=("Link", "First tab", "visible-text")),
            ]),
            N("li", (360, 200, 650, 230), style={"overflow_clipped": True}, children=[
                N("a", (370, 204, 520, 226), text="Hidden tab", attrs={"href": "#2"},
                  style={"overflow_clipped": True}),
            ]),
        ]),
        N("button", (50, 300, 200, 340), text="Visible button", expect=("Button", "Visible button", "visible-text")),
    ])


def aria_fallbacks():
    return Page("aria_fallbacks", "https://fixtures.test/aria", "Latent descriptions", (1024, 768), body=[
        N("button", (20, 20, 60, 60), attrs={"aria-label": "Close dialog"},
          expect=("Button", "Close dialog", "aria-label"), children=[N("svg", (28, 28, 52, 52))]),
        N("a", (80, 20, 200, 60), attrs={"href": "/help", "title": "Open the help center"},
          expect=("Link", "Open the help center", "title"), children=[N("svg", (90, 28, 114, 52))]),
        N("a", (220, 20, 400, 80), attrs={"href": "/"}, expect=("Link", "Company logo", "alt"),
          children=[N("img", (220, 20, 400, 80), attrs={"alt": "Company logo"})]),
        N("button", (420, 20, 520, 60), attrs={"aria-label": "ignored label"},
          expect=("Button", "Subscribe", "visible-text"), children=[N("span", (430, 30, 510, 50), text="Subscribe")]),
        N("input", (20, 100, 400, 140), attrs={"type": "email", "title": "Your email address"},
          expect=("Input", "Your email address", "title")),
        N("input", (420, 100, 800, 140), attrs={"type": "text", "aria-label": "   "}),
        N("div", (20, 160, 300, 200), role="button", attrs={"aria-label": "More options", "title": "More"},
          expect=("Button", "More options", "aria-label")),
    ])


def alt_title_images():
    return Page("alt_title_images", "https://fixtures.test/images", "Images", (1024, 768), body=[
        N("img", (20, 20, 320, 220), attrs={"alt": "Mountain at sunrise", "title": "Photo"},
          expect=("Image", "Mountain at sunrise", "alt")),
        N("img", (340, 20, 640, 220), attrs={"title": "A river delta"}, expect=("Image", "A river delta", "title")),
        N("img", (660, 20, 960, 220), attrs={"aria-label": "City skyline"}, expect=("Image", "City skyline", "aria-label")),
        N("img", (20, 240, 220, 440), expect=("Image", "", "none")),
        N("img", (240, 240, 288, 288), attrs={"alt": "Cart"}, expect=("Icon", "Cart", "alt")),
        N("img", (300, 240, 349, 289), attrs={"alt": "Wide badge"}, expect=("Image", "Wide badge", "alt")),
        N("svg", (360, 240, 376, 256), attrs={"aria-label": "Notifications"}, expect=("Icon", "Notifications", "aria-label")),
        N("picture", (400, 240, 700, 440), children=[N("img", (400, 240, 700, 440), attrs={"alt": "Inner"})],
          expect=("Image", "Inner", "alt")),
    ])


def paragraph_inline_link():
    return Page("paragraph_inline_link", "https://fixtures.test/paragraph", "Paragraph", (800, 600), body=[
        N("p", (20, 20, 780, 44), children=[
            txt("span", (20, 20, 380, 44), "Read the full announcement on"),
            N("a", (384, 20, 470, 44), text="our blog", attrs={"href": "/blog"},
              expect=("Link", "our blog", "visible-text")),
        ]),
        N("p", (20, 60, 780, 84), text="A sentence with an", children=[
            N("a", (200, 60, 260, 84), text="inline", attrs={"href": "#"}, expect=("Link", "inline", "visible-text")),
        ]),
        txt("p", (20, 100, 780, 124), "Plain paragraph with no markup."),
    ])


def offscreen():
    return Page("offscreen", "https://fixtures.test/offscreen", "Offscreen", (800, 600), body=[
        N("a", (10, -60, 200, -20), text="far above", attrs={"href": "#"}),
        N("a", (10, -30, 200, 10), text="straddles the top", attrs={"href": "#"},
          expect=("Link", "straddles the top", "visible-text")),
        N("a", (700, 100, 900, 140), text="straddles the right", attrs={"href": "#"},
          expect=("Link", "straddles the right", "visible-text")),
        N("a", (10, 580, 200, 640), text="straddles the bottom", attrs={"href": "#"},
          expect=("Link", "straddles the bottom", "visible-text")),
        N("a", (10, 598, 200, 640), text="two pixels showing", attrs={"href": "#"}),
        N("a", (10, 597, 200, 640), text="three pixels showing", attrs={"href": "#"},
          expect=("Link", "three pixels showing", "visible-text")),
        N("a", (-400, 200, -100, 240), text="far left", attrs={"href": "#"}),
        N("a", (10, 700, 200, 740), text="far below", attrs={"href": "#"}),
    ])


def occluded():
    return Page("occluded", "https://fixtures.test/modal", "Modal", (800, 600), body=[
        N("main", (0, 0, 800, 600), children=[
            N("a", (20, 20, 200, 50), text="Behind the modal", attrs={"href": "#"}, occluded=True),
            N("p", (20, 80, 400, 110), text="Covered text", occluded=True),
        ]),
        N("div", (200, 150, 600, 450), role="dialog", style={"position": "fixed"}, children=[
            txt("h2", (220, 170, 580, 200), "Accept cookies?"),
            N("button", (220, 380, 380, 420), text="Accept", expect=("Button", "Accept", "visible-text")),
            N("button", (420, 380, 580, 420), text="Reject", expect=("Button", "Reject", "visible-text")),
        ]),
    ])


def code_blocks():
    return Page("code_blocks", "https://fixtures.test/code", "Code", (1024, 768), body=[
        txt("h1", (20, 20, 600, 60), "Installing the package"),
        N("pre", (20, 80, 1000, 200), text="pip install guiforge\nguiforge --help",
          expect=("Code", "pip install guiforge guiforge --help", "visible-text")),
        N("p", (20, 220, 1000, 250), children=[
            txt("span", (20, 220, 120, 250), "Then run"),
            N("code", (124, 220, 260, 250), text="guiforge stats", expect=("Code", "guiforge stats", "visible-text")),
        ]),
        N("pre", (20, 270, 1000, 300), children=[N("code", (20, 270, 300, 300), text="echo ok")],
          expect=("Code", "echo ok", "visible-text")),
    ])


def form_inputs():
    return Page("form_inputs", "https://fixtures.test/form", "Sign up", (1024, 768), body=[
        N("form", (100, 50, 900, 700), children=[
            txt("label", (120, 70, 300, 90), "Full name"),
            N("input", (120, 94, 600, 124), attrs={"type": "text", "aria-label": "Full name"},
              expect=("Input", "Full name", "aria-label")),
            N("textarea", (120, 140, 600, 240), attrs={"aria-label": "About you"},
              expect=("Input", "About you", "aria-label")),
            N("select", (120, 260, 400, 290), children=[N("option", (120, 260, 400, 290), text="Germany")],
              expect=("Input", "Germany", "visible-text")),
            N("input", (120, 310, 140, 330), attrs={"type": "checkbox", "title": "Accept terms"},
              expect=("Input", "Accept terms", "title")),
            N("div", (120, 350, 600, 380), role="textbox", text="Editable note",
              expect=("Input", "Editable note", "visible-text")),
            N("input", (120, 400, 260, 440), attrs={"type": "submit", "aria-label": "Create account"},
              expect=("Button", "Create account", "aria-label")),
            N("input", (280, 400, 420, 440), attrs={"type": "reset", "title": "Clear form"},
              expect=("Button", "Clear form", "title")),
            N("input", (440, 400, 580, 440), attrs={"type": "hidden", "aria-label": "token"}, style={"display": "none"}),
        ]),
    ])


def nav_menu():
    items = ["Home", "Products", "Pricing", "Docs", "Blog", "Careers", "Contact"]
    lis = []
    for i, label in enumerate(items):
        x = 20 + i * 110
        lis.append(N("li", (x, 10, x + 100, 50), children=[
            N("a", (x + 5, 15, x + 95, 45), text=label, attrs={"href": "/" + label.lower()},
              expect=("Link", label, "visible-text")),
        ]))
    return Page("nav_menu", "https://fixtures.test/nav", "Navigation", (1280, 720), body=[
        N("nav", (0, 0, 1280, 60), children=[N("ul", (0, 0, 1280, 60), children=lis)]),
        txt("h1", (20, 100, 800, 150), "Welcome to the product"),
    ])


def role_based():
    return Page("role_based", "https://fixtures.test/roles", "Roles", (800, 600), body=[
        N("div", (20, 20, 200, 60), role="button", children=[N("span", (30, 30, 190, 50), text="Play")],
          expect=("Button", "Play", "visible-text")),
        N("span", (20, 80, 200, 110), role="link", text="Next chapter", expect=("Link", "Next chapter", "visible-text")),
        N("div", (20, 130, 400, 160), role="textbox", attrs={"aria-label": "Comment"},
          expect=("Input", "Comment", "aria-label")),
        N("a", (20, 180, 200, 210), role="button", text="Link wins", attrs={"href": "#"},
          expect=("Link", "Link wins", "visible-text")),
        N("button", (20, 230, 200, 260), role="link", text="Also a link", expect=("Link", "Also a link", "visible-text")),
    ])


def nested_links():
    return Page("nested_links", "https://fixtures.test/cards", "Cards", (1024, 768), body=[
        N("a", (20, 20, 320, 320), attrs={"href": "/item/1"}, expect=("Link", "Trail shoes 89 EUR Buy", "visible-text"),
          children=[
              N("div", (20, 20, 320, 320), children=[
                  N("img", (20, 20, 320, 220), attrs={"alt": "Shoe photo"}),
                  N("h3", (30, 230, 310, 260), text="Trail shoes"),
                  N("span", (30, 270, 120, 300), text="89 EUR"),
                  N("button", (200, 270, 310, 300), text="Buy"),
              ]),
          ]),
        N("a", (340, 20, 640, 320), attrs={"href": "/item/2"}, expect=("Link", "Rain jacket", "alt"),
          children=[N("img", (340, 20, 640, 320), attrs={"alt": "Rain jacket"})]),
    ])


def mobile_layout():
    return Page("mobile_layout", "https://m.fixtures.test/", "Mobile", (375, 667), body=[
        N("header", (0, 0, 375, 56), children=[
            N("button", (8, 8, 48, 48), attrs={"aria-label": "Menu"}, expect=("Button", "Menu", "aria-label"),
              children=[N("svg", (16, 16, 40, 40))]),
            N("img", (120, 12, 255, 44), attrs={"alt": "Shop"}, expect=("Image", "Shop", "alt")),
            N("a", (327, 8, 367, 48), attrs={"href": "/cart", "aria-label": "Cart, 2 items"},
              expect=("Link", "Cart, 2 items", "aria-label"), children=[N("svg", (335, 16, 359, 40))]),
        ]),
        txt("h1", (16, 80, 359, 120), "Summer sale"),
        txt("p", (16, 130, 359, 190), "Up to 50% off selected items until Sunday."),
        N("a", (16, 210, 359, 258), text="Shop now", attrs={"href": "/sale"}, expect=("Link", "Shop now", "visible-text")),
        N("img", (0, 280, 375, 700), attrs={"alt": "Beach outfit"}, expect=("Image", "Beach outfit", "alt")),
    ])


def scrolled_capture():
    p = Page("scrolled_capture", "https://fixtures.test/long", "Long article", (1280, 720),
             scroll=(0.0, 920.0), page_height=1640,
             capture={"capture_index": 1, "page_height": 1640.0, "source": "fineweb"}, body=[
        N("p", (40, 40 - 920, 1240, 80 - 920), text="Intro paragraph, scrolled away"),
        txt("h2", (40, 960 - 920, 1240, 1000 - 920), "Section three"),
        txt("p", (40, 1010 - 920, 1240, 1100 - 920), "Body text of section three continues here."),
        N("a", (40, 1560 - 920, 200, 1590 - 920), text="Back to top", attrs={"href": "#top"},
          expect=("Link", "Back to top", "visible-text")),
    ])
    return p


def svg_icons_row():
    labels = ["Bold", "Italic", "Underline", "Undo", "Redo"]
    kids = []
    for i, label in enumerate(labels):
        x = 10 + i * 40
        kids.append(N("svg", (x, 10, x + 32, 42), attrs={"aria-label": label}, expect=("Icon", label, "aria-label")))
    kids.append(N("svg", (220, 10, 252, 42), attrs={"title": "Strike"}, expect=("Icon", "Strike", "title")))
    kids.append(N("canvas", (300, 10, 900, 410), expect=("Image", "", "none")))
    kids.append(N("canvas", (920, 10, 960, 50), attrs={"aria-label": "Color swatch"},
                  expect=("Icon", "Color swatch", "aria-label")))
    return Page("svg_icons_row", "https://fixtures.test/editor", "Editor", (1024, 768), body=[
        N("div", (0, 0, 1024, 60), role="toolbar", children=kids[:6]),
        kids[6],
        kids[7],
    ])


def empty_page():
    return Page("empty_page", "https://fixtures.test/empty", "", (640, 480), body=[
        N("div", (0, 0, 640, 480), children=[N("div", (0, 0, 640, 240)), N("span", (0, 240, 640, 480), text="   ")]),
    ])


def whitespace_text():
    return Page("whitespace_text", "https://fixtures.test/ws", "Whitespace", (800, 600), body=[
        N("p", (20, 20, 780, 60), text="  lots   of\n\n  spaces\t here  ",
          expect=("Text", "lots of spaces here", "visible-text")),
        N("button", (20, 80, 200, 120), children=[
            N("span", (24, 84, 90, 116), text=" I'm "),
            N("span", (92, 84, 196, 116), text="\tFeeling Lucky "),
        ], expect=("Button", "I'm Feeling Lucky", "visible-text")),
        N("a", (20, 140, 200, 170), text="  ", attrs={"href": "#", "title": "  Spaced   title "},
          expect=("Link", "Spaced title", "title")),
    ])


def visibility_inheritance():
    return Page("visibility_inheritance", "https://fixtures.test/visibility", "Visibility", (800, 600), body=[
        N("div", (0, 0, 800, 100), style={"visibility": "hidden"}, children=[
            N("a", (10, 10, 200, 40), text="Visible child of hidden parent", attrs={"href": "#"},
              style={"visibility": "visible"}),
        ]),
        N("div", (0, 100, 800, 200), children=[
            N("span", (10, 110, 200, 140), text="Hidden span", style={"visibility": "hidden"}),
            txt("span", (210, 110, 400, 140), "Shown span"),
        ]),
        N("div", (0, 200, 800, 300), style={"display": "contents"}, children=[
            txt("p", (10, 210, 400, 240), "Inside display contents"),
        ]),
    ])


def images_large():
    return Page("images_large", "https://fixtures.test/gallery", "Gallery", (1366, 768), body=[
        N("img", (0, 0, 1366, 400), attrs={"alt": "Hero banner"}, expect=("Image", "Hero banner", "alt")),
        N("figure", (20, 420, 420, 760), children=[
            N("img", (20, 420, 420, 700), attrs={"alt": "Dog on a beach"}, expect=("Image", "Dog on a beach", "alt")),
            txt("figcaption", (20, 705, 420, 735), "Our office dog, Biscuit."),
        ]),
        N("figure", (460, 420, 860, 760), children=[
            N("img", (460, 420, 860, 700), attrs={"src": "/cat.jpg"}, expect=("Image", "", "none")),
            txt("figcaption", (460, 705, 860, 735), "Uncaptioned cat."),
        ]),
        N("svg", (900, 420, 1300, 760), attrs={"aria-label": "Sales chart"}, expect=("Image", "Sales chart", "aria-label"),
          children=[N("text", (920, 440, 1000, 460), text="Q1")]),
    ])


def table_text():
    rows = []
    data = [("Plan", "Price"), ("Basic", "5 USD"), ("Pro", "15 USD")]
    for r, (a, b) in enumerate(data):
        y = 60 + r * 40
        rows.append(N("tr", (20, y, 620, y + 40), children=[
            txt("td", (20, y, 320, y + 40), a),
            txt("td", (320, y, 620, y + 40), b),
        ]))
    return Page("table_text", "https://fixtures.test/table", "Pricing", (800, 600), body=[
        txt("caption", (20, 20, 620, 50), "Plans and prices"),
        N("table", (20, 60, 620, 180), children=[N("tbody", (20, 60, 620, 180), children=rows)]),
        N("a", (20, 200, 200, 230), text="Compare plans", attrs={"href": "/compare"},
          expect=("Link", "Compare plans", "visible-text")),
    ])


def long_article():
    paras = []
    for i in range(8):
        y = 100 + i * 90
        text = "Paragraph %d of the article body." % (i + 1)
        if y + 60 <= 768:
            paras.append(txt("p", (80, y, 944, y + 60), text))
        elif y < 768:
            paras.append(N("p", (80, y, 944, y + 60), text=text,
                           expect=("Text", text, "visible-text")))
        else:
            paras.append(N("p", (80, y, 944, y + 60), text=text))
    return Page("long_article", "https://fixtures.test/article", "An article", (1024, 768),
                meta="A long article used to test partially visible content.", page_height=900, body=[
        txt("h1", (80, 20, 944, 80), "A long article"),
    ] + paras)


def icon_link_mix():
    return Page("icon_link_mix", "https://fixtures.test/social", "Social", (1280, 720), body=[
        N("footer", (0, 600, 1280, 720), children=[
            N("a", (20, 640, 52, 672), attrs={"href": "https://x.test"}, expect=("Link", "X profile", "alt"),
              children=[N("img", (20, 640, 52, 672), attrs={"alt": "X profile"})]),
            N("a", (60, 640, 92, 672), attrs={"href": "https://gh.test"}, expect=("Link", "Source code", "aria-label"),
              children=[N("svg", (60, 640, 92, 672), attrs={"aria-label": "Source code"})]),
            N("span", (110, 640, 142, 672), children=[N("svg", (110, 640, 142, 672), attrs={"title": "Status: online"},
                                                         expect=("Icon", "Status: online", "title"))]),
            txt("small", (200, 646, 600, 666), "Copyright 2024 Example Inc."),
        ]),
    ])


PAGES = [
    google_home, hidden_everything, button_icon_text, opacity_chain, overflow_clipping, aria_fallbacks,
    alt_title_images, paragraph_inline_link, offscreen, occluded, code_blocks, form_inputs, nav_menu,
    role_based, nested_links, mobile_layout, scrolled_capture, svg_icons_row, empty_page, whitespace_text,
    visibility_inheritance, images_large, table_text, long_article, icon_link_mix,
]


def dump(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def main():
    index = {}
    for make in PAGES:
        page = make()
        nodes = flatten(page)
        out = os.path.join(ROOT, page.name)
        os.makedirs(out, exist_ok=True)
        png = render(page, nodes)
        with open(os.path.join(out, "screenshot.png"), "wb") as f:
            f.write(png)
        with open(os.path.join(out, "snapshot.json"), "w", encoding="utf-8") as f:
            f.write(dump(snapshot_doc(page, nodes)))
        gold = golden(page, nodes, png)
        with open(os.path.join(out, "annotation.json"), "w", encoding="utf-8") as f:
            f.write(dump(gold))
        if page.capture:
            with open(os.path.join(out, "capture.json"), "w", encoding="utf-8") as f:
                f.write(dump(page.capture))
        index[page.name] = {"nodes": len(nodes), "elements": len(gold["elements"])}
    with open(os.path.join(ROOT, "INDEX.json"), "w", encoding="utf-8") as f:
        f.write(dump(index))
    print("wrote %d pages" % len(index))


if __name__ == "__main__":
    main()
