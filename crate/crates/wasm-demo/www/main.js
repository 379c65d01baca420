import init, { cost_table, rank_channels, bcast_schedule, backoff_curve } from "./pkg/fmi_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const usd = (v) => "$" + v.toLocaleString(undefined, { minimumFractionDigits: 2, maximumFractionDigits: 2 });

function fail(target, err) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err);
  target.append(p);
}

function table(headers, rows, highlightFirst) {
  const t = document.createElement("table");
  const head = t.createTHead().insertRow();
  for (const h of headers) head.append(Object.assign(document.createElement("th"), { textContent: h }));
  const body = t.createTBody();
  rows.forEach((cells, i) => {
    const tr = body.insertRow();
    if (highlightFirst && i === 0) tr.className = "best";
    for (const c of cells) tr.insertCell().textContent = c;
  });
  return t;
}

function renderCost() {
  const out = $("cost");
  const args = [num("size"), num("participants"), num("memory"), num("reps"), $("preset").value];
  try {
    const rows = JSON.parse(rank_channels(...args, $("policy").value, num("budget")));
    out.replaceChildren(
      table(
        ["channel", "ms / exchange", "function cost", "channel cost", "total"],
        rows.map((r) => [r.channel, r.time_ms.toFixed(2), usd(r.faas_usd), usd(r.channel_usd), usd(r.total_usd)]),
        true,
      ),
    );
    const all = JSON.parse(cost_table(...args));
    const cheapest = all.reduce((a, b) => (b.total_usd < a.total_usd ? b : a));
    const fastest = all.reduce((a, b) => (b.time_ms < a.time_ms ? b : a));
    const cap = document.createElement("p");
    cap.textContent = `Cheapest overall: ${cheapest.channel}. Fastest: ${fastest.channel}.`;
    out.append(cap);
  } catch (e) {
    fail(out, e);
  }
}

function renderSchedule() {
  const out = $("schedule");
  try {
    const s = JSON.parse(bcast_schedule(num("ranks"), num("root")));
    const w = 640, rowH = 22, top = 24;
    const colW = (w - 60) / Math.max(s.rounds, 1);
    const h = top + s.n * rowH + 10;
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("width", w);
    svg.setAttribute("height", h);
    const el = (name, attrs, text) => {
      const e = document.createElementNS(svg.namespaceURI, name);
      for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
      if (text !== undefined) e.textContent = text;
      svg.append(e);
    };
    const y = (rank) => top + rank * rowH + rowH / 2;
    for (let r = 0; r < s.n; r++) el("text", { x: 4, y: y(r) + 4, "font-size": 11 }, `rank ${r}`);
    for (let k = 1; k <= s.rounds; k++) el("text", { x: 60 + (k - 0.5) * colW - 20, y: 14, "font-size": 11 }, `round ${k}`);
    for (const [round, from, to] of s.steps) {
      const x = 60 + (round - 0.5) * colW;
      el("line", { x1: x - 10, y1: y(from), x2: x + 10, y2: y(to), stroke: "#3366cc", "stroke-width": 1.5 });
      el("circle", { cx: x + 10, cy: y(to), r: 3, fill: "#3366cc" });
    }
    const cap = document.createElement("p");
    cap.textContent = `${s.messages} messages in ${s.rounds} rounds.`;
    out.replaceChildren(cap, svg);
  } catch (e) {
    fail(out, e);
  }
}

function renderBackoff() {
  const out = $("backoff");
  try {
    const pts = JSON.parse(backoff_curve(num("floor")));
    const w = 640, h = 200, pad = 40;
    const maxSleep = Math.max(...pts.map((p) => p.sleep_ms));
    const path = pts
      .map((p, i) => `${i ? "L" : "M"}${pad + (p.retry / pts.length) * (w - pad - 10)},${h - pad - (p.sleep_ms / maxSleep) * (h - pad - 10)}`)
      .join(" ");
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("width", w);
    svg.setAttribute("height", h);
    svg.innerHTML =
      `<path d="${path}" fill="none" stroke="#cc6633" stroke-width="1.5"/>` +
      `<text x="${pad}" y="${h - 12}" font-size="11">retry 1</text>` +
      `<text x="${w - 60}" y="${h - 12}" font-size="11">retry ${pts.length}</text>` +
      `<text x="4" y="14" font-size="11">${maxSleep} ms</text>`;
    const last = pts[pts.length - 1];
    const cap = document.createElement("p");
    cap.textContent = `Sleep before retry 101: ${pts[100].sleep_ms} ms. Worst case before giving up: ${(last.cumulative_ms / 1000).toFixed(2)} s.`;
    out.replaceChildren(cap, svg);
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("status").textContent = "Edit any field to recompute.";
for (const id of ["size", "reps", "participants", "memory", "preset", "policy", "budget"]) $(id).addEventListener("input", renderCost);
for (const id of ["ranks", "root"]) $(id).addEventListener("input", renderSchedule);
$("floor").addEventListener("input", renderBackoff);
renderCost();
renderSchedule();
renderBackoff();
