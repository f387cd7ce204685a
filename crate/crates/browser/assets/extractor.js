// Injectable snapshot collector. Evaluates to one JSON string: the snapshot
// document, or {"error": message} when collection fails.
(() => {
  const ATTRS = ["alt", "title", "aria-label", "aria-hidden", "href", "type", "name", "placeholder", "value", "src", "role", "tabindex", "disabled"];
  const SKIP = new Set(["script", "style", "noscript", "template"]);

  const rectOf = (el) => {
    const r = el.getBoundingClientRect();
    if (!(r.width > 0 && r.height > 0)) return null;
    return { x1: r.left, y1: r.top, x2: r.right, y2: r.bottom };
  };

  const clips = (style) =>
    style.overflowX !== "visible" || style.overflowY !== "visible" || style.clipPath !== "none";

  const intersect = (a, b) => {
    const x1 = Math.max(a.x1, b.x1), y1 = Math.max(a.y1, b.y1);
    const x2 = Math.min(a.x2, b.x2), y2 = Math.min(a.y2, b.y2);
    return x2 > x1 && y2 > y1 ? { x1, y1, x2, y2 } : null;
  };

  const directText = (el) => {
    let out = "";
    for (const c of el.childNodes) {
      if (c.nodeType === Node.TEXT_NODE) out += c.nodeValue;
    }
    return out.replace(/\s+/g, " ").trim();
  };

  const hitOccluded = (el, rect) => {
    const cx = (rect.x1 + rect.x2) / 2, cy = (rect.y1 + rect.y2) / 2;
    if (cx < 0 || cy < 0 || cx >= innerWidth || cy >= innerHeight) return false;
    const hit = document.elementFromPoint(cx, cy);
    if (!hit) return false;
    return !(hit === el || el.contains(hit) || hit.contains(el));
  };

  try {
    const nodes = [];
    const walk = (el, parent, clip) => {
      const tag = el.tagName.toLowerCase();
      if (SKIP.has(tag)) return;
      const style = getComputedStyle(el);
      const rect = rectOf(el);
      let clipped = false;
      if (rect && clip) clipped = intersect(rect, clip) === null;
      const attrs = {};
      for (const a of ATTRS) {
        const v = el.getAttribute(a);
        if (v !== null && a !== "role") attrs[a] = v;
      }
      const id = nodes.length;
      nodes.push({
        id,
        parent,
        tag,
        role: el.getAttribute("role") || "",
        attrs,
        text: directText(el),
        rect,
        style: {
          display: style.display,
          visibility: style.visibility,
          opacity: Number(style.opacity),
          cursor: style.cursor,
          position: style.position,
          overflow_clipped: clipped,
        },
        occluded: rect ? hitOccluded(el, rect) : false,
      });
      let childClip = clip;
      if (rect && clips(style)) childClip = clip ? intersect(clip, rect) || { x1: 0, y1: 0, x2: 0, y2: 0 } : rect;
      for (const c of el.children) walk(c, id, childClip);
    };
    walk(document.documentElement, null, null);
    const meta = document.querySelector('meta[name="description"]');
    return JSON.stringify({
      url: location.href,
      title: document.title,
      meta_description: meta ? meta.getAttribute("content") || "" : "",
      viewport: { width: innerWidth, height: innerHeight, dpr: devicePixelRatio },
      scroll: { x: scrollX, y: scrollY },
      nodes,
    });
  } catch (e) {
    return JSON.stringify({ error: String(e && e.message ? e.message : e) });
  }
})()
