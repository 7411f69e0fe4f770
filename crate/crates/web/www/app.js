import init, { generate, solve, inspect_zone } from "./pkg/zonecg_web.js";

const $ = (id) => document.getElementById(id);
const canvas = $("map");
const ctx = canvas.getContext("2d");
const PALETTE = ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324"];
const PAD = 40;

let instanceJson = null;
let instance = null;
let solution = null;
let selected = new Set();
let screen = [];
let view = null;

function num(id) {
  return Number($(id).value);
}

function show(text, isError = false) {
  $("info").textContent = text;
  $("info").className = isError ? "error" : "";
}

function project() {
  const lats = instance.cells.map((c) => c.lat);
  const lons = instance.cells.map((c) => c.lon);
  const [lat0, lat1] = [Math.min(...lats), Math.max(...lats)];
  const [lon0, lon1] = [Math.min(...lons), Math.max(...lons)];
  const kx = Math.cos((((lat0 + lat1) / 2) * Math.PI) / 180);
  const span = Math.max((lon1 - lon0) * kx, lat1 - lat0) || 1;
  view = { lat0, lon0, kx, scale: (canvas.width - 2 * PAD) / span };
  screen = instance.cells.map((c) => toScreen(c.lon, c.lat));
}

function toScreen(lon, lat) {
  const { lat0, lon0, kx, scale } = view;
  return [PAD + (lon - lon0) * kx * scale, canvas.height - PAD - (lat - lat0) * scale];
}

function outgoingDemand() {
  const out = new Array(instance.cells.length).fill(0);
  for (const [o, d, w] of instance.demand) {
    out[o] += w;
    out[d] += w;
  }
  return out;
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!instance) return;
  const demand = outgoingDemand();
  const peak = Math.max(...demand) || 1;
  const radius = Math.max(6, Math.min(22, 200 / Math.sqrt(instance.cells.length)));

  if (solution) {
    solution.zones.forEach((zone, k) => {
      const colour = PALETTE[k % PALETTE.length];
      ctx.strokeStyle = colour;
      ctx.fillStyle = colour + "22";
      ctx.lineWidth = 2;
      const ring = solution.geojsonRings[k];
      ctx.beginPath();
      ring.forEach(([lon, lat], i) => {
        const [x, y] = toScreen(lon, lat);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.closePath();
      ctx.fill();
      ctx.stroke();
    });
  }

  instance.cells.forEach((cell, i) => {
    const [x, y] = screen[i];
    const t = demand[i] / peak;
    ctx.fillStyle = `rgb(${Math.round(255 - 150 * t)}, ${Math.round(240 - 200 * t)}, ${Math.round(200 - 180 * t)})`;
    ctx.beginPath();
    ctx.arc(x, y, radius * 0.6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.lineWidth = selected.has(i) ? 3 : 1;
    ctx.strokeStyle = selected.has(i) ? "#000" : "#888";
    ctx.stroke();
  });
}

function nearestCell(x, y) {
  let best = -1;
  let bestD = Infinity;
  screen.forEach(([cx, cy], i) => {
    const d = (cx - x) ** 2 + (cy - y) ** 2;
    if (d < bestD) {
      bestD = d;
      best = i;
    }
  });
  return bestD < 30 * 30 ? best : -1;
}

function inspectSelection() {
  if (selected.size === 0) {
    show(solution ? summary() : "");
    return;
  }
  try {
    const info = JSON.parse(inspect_zone(instanceJson, JSON.stringify([...selected])));
    show(
      `cells        ${info.cells.join(", ")}\n` +
        `diameter^2   ${info.diameter_sq.toFixed(4)}\n` +
        `cost         ${info.cost.toFixed(4)}\n` +
        `demand       ${info.demand}\n` +
        `within B0    ${info.within_zone_budget}`,
    );
  } catch (e) {
    show(String(e), true);
  }
}

function summary() {
  const s = solution.raw;
  const lines = [
    `coverage     ${s.coverage_pct.toFixed(2)}%`,
    `zones        ${s.zones.length}`,
    `cost         ${s.budget_used.toFixed(3)} of ${s.budget}`,
    `iterations   ${s.cg ? s.cg.iterations : "-"}`,
  ];
  return lines.join("\n");
}

$("generate").onclick = () => {
  const spec = {
    rows: num("rows"),
    cols: num("cols"),
    layout: $("layout").value,
    hotspots: num("hotspots"),
    trips: num("trips"),
    seed: num("seed"),
  };
  try {
    instanceJson = generate(JSON.stringify(spec));
    instance = JSON.parse(instanceJson);
    solution = null;
    selected.clear();
    project();
    draw();
    $("solve").disabled = false;
    show(`${instance.cells.length} cells, ${instance.demand.length} OD pairs`);
  } catch (e) {
    show(String(e), true);
  }
};

$("solve").onclick = () => {
  const options = {
    budget: num("budget"),
    zone_budget: num("zoneBudget"),
    pricing: $("pricing").value,
    time_limit_s: num("timeLimit"),
    seed: num("seed"),
  };
  show("solving...");
  setTimeout(() => {
    try {
      const out = JSON.parse(solve(instanceJson, JSON.stringify(options)));
      solution = {
        raw: out.solution,
        zones: out.solution.zones,
        geojsonRings: out.geojson.features.map((f) => f.geometry.coordinates[0]),
      };
      selected.clear();
      draw();
      show(summary());
    } catch (e) {
      show(String(e), true);
    }
  }, 10);
};

$("clear").onclick = () => {
  selected.clear();
  draw();
  inspectSelection();
};

canvas.onclick = (ev) => {
  if (!instance) return;
  const rect = canvas.getBoundingClientRect();
  const i = nearestCell(ev.clientX - rect.left, ev.clientY - rect.top);
  if (i < 0) return;
  if (ev.shiftKey && solution) {
    const zone = solution.zones.find((z) => z.cells.includes(i));
    selected = new Set(zone ? zone.cells : []);
  } else if (selected.has(i)) {
    selected.delete(i);
  } else {
    selected.add(i);
  }
  draw();
  inspectSelection();
};

await init();
$("generate").click();
