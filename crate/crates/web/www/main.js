import init, { envelope_heatmap, gradient_sets, trace_arc } from "./pkg/semiconcave_web.js";

const $ = (id) => document.getElementById(id);
const CELLS = 110;
let heat = null;
let gradients = null;

function status(msg) {
  $("status").textContent = msg;
}

// map [-r, r]^2 to the canvas, y up
function projector(canvas, r) {
  const s = canvas.width / (2 * r);
  return ([x, y]) => [(x + r) * s, (r - y) * s];
}

function color(t) {
  // blue to yellow
  const r = Math.round(40 + 215 * t), g = Math.round(60 + 170 * t), b = Math.round(150 - 110 * t);
  return `rgb(${r},${g},${b})`;
}

function drawHeat(arcs = []) {
  const c = $("heat"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  if (!heat) return;
  const w = c.width / heat.cells, span = heat.max - heat.min || 1;
  heat.values.forEach((v, i) => {
    if (v === null) return;
    ctx.fillStyle = color((v - heat.min) / span);
    ctx.fillRect((i % heat.cells) * w, Math.floor(i / heat.cells) * w, w + 0.5, w + 0.5);
  });
  const to = projector(c, 1);
  ctx.setLineDash([5, 4]);
  ctx.strokeStyle = "#333";
  ctx.beginPath();
  ctx.moveTo(...to([0, 1]));
  ctx.lineTo(...to([0, -1]));
  ctx.stroke();
  ctx.setLineDash([]);
  for (const arc of arcs) {
    ctx.strokeStyle = arc.lost_at === null ? "#d00" : "#f80";
    ctx.lineWidth = 2.5;
    ctx.beginPath();
    arc.points.forEach((p, i) => (i ? ctx.lineTo(...to(p)) : ctx.moveTo(...to(p))));
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function drawGradients() {
  const c = $("grad"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  if (!gradients) return;
  const to = projector(c, 1.3);
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.moveTo(...to([-1.3, 0])); ctx.lineTo(...to([1.3, 0]));
  ctx.moveTo(...to([0, -1.3])); ctx.lineTo(...to([0, 1.3]));
  ctx.stroke();
  const dots = (pts, fill, r) => {
    ctx.fillStyle = fill;
    for (const p of pts) {
      const [x, y] = to(p);
      ctx.beginPath(); ctx.arc(x, y, r, 0, 2 * Math.PI); ctx.fill();
    }
  };
  dots(gradients.u, "#999", 4);
  dots(gradients.envelope, "#1565c0", 2.2);
  if (gradients.p0) {
    dots([gradients.p0], "#d00", 5);
    ctx.strokeStyle = "#d00";
    for (const d of gradients.directions) {
      ctx.beginPath();
      ctx.moveTo(...to(gradients.p0));
      ctx.lineTo(...to([gradients.p0[0] + 0.5 * d[0], gradients.p0[1] + 0.5 * d[1]]));
      ctx.stroke();
    }
  }
  $("summary").textContent =
    `grey: gradients of u, blue: of the envelope\n` +
    `hull-gap condition: ${gradients.condition_h}\n` +
    `p0: ${JSON.stringify(gradients.p0)}\n` +
    `directions: ${JSON.stringify(gradients.directions.map((d) => d.map((v) => +v.toFixed(3))))}`;
}

function params() {
  return [$("example").value, parseFloat($("spacing").value)];
}

// lets the status line repaint before a long synchronous call
const frame = () => new Promise((r) => setTimeout(r, 20));

async function build() {
  const [example, spacing] = params();
  status("building envelope...");
  await frame();
  try {
    const t = performance.now();
    heat = JSON.parse(envelope_heatmap(example, spacing, CELLS));
    gradients = JSON.parse(gradient_sets(example, spacing));
    status(`${heat.pairs} support pairs, ${((performance.now() - t) / 1000).toFixed(1)} s`);
  } catch (e) {
    status(`error: ${e}`);
  }
  drawHeat();
  drawGradients();
}

async function trace(angles) {
  const [example, spacing] = params();
  status("tracing...");
  await frame();
  try {
    const arcs = angles.map((a) => JSON.parse(trace_arc(example, spacing, a)));
    drawHeat(arcs);
    status(arcs.map((a, i) => `${angles[i]}°: ` +
      (a.lost_at === null ? `${a.points.length} samples, validated ${a.validated}` : `lost at s = ${a.lost_at}`)).join("; "));
  } catch (e) {
    status(`error: ${e}`);
  }
}

await init();
$("theta").addEventListener("input", () => ($("theta-out").textContent = `${$("theta").value}°`));
$("draw").addEventListener("click", build);
$("example").addEventListener("change", build);
$("spacing").addEventListener("change", build);
$("trace").addEventListener("click", () => trace([parseFloat($("theta").value)]));
$("suggest").addEventListener("click", () => {
  if (!gradients || gradients.directions.length === 0) {
    status("the condition fails here; pick a direction with the slider");
    return;
  }
  trace(gradients.directions.map((d) => Math.round((Math.atan2(d[1], d[0]) * 180) / Math.PI + 360) % 360));
});
build();
