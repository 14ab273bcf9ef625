import init, { simulate_circle, explore_wrench } from "./pkg/dualtilt_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
let lastRun = null;

// Line plot of several series sharing an x axis.
function plot(canvas, xs, series, labels) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  let lo = Infinity, hi = -Infinity;
  for (const s of series) for (const v of s) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (hi - lo < 1e-9) { lo -= 1; hi += 1; }
  const x0 = xs[0], x1 = xs[xs.length - 1] || 1;
  const px = (x) => pad + (w - 2 * pad) * (x - x0) / (x1 - x0 || 1);
  const py = (y) => h - pad + (2 * pad - h) * (y - lo) / (hi - lo);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad / 2, w - 2 * pad, h - 1.5 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(hi.toPrecision(4), 2, pad / 2 + 10);
  ctx.fillText(lo.toPrecision(4), 2, h - pad);
  ctx.fillText(x0.toFixed(1), pad, h - pad / 2 + 8);
  ctx.fillText(x1.toFixed(1), w - pad - 16, h - pad / 2 + 8);
  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.beginPath();
    s.forEach((v, i) => (i ? ctx.lineTo(px(xs[i]), py(v)) : ctx.moveTo(px(xs[i]), py(v))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(labels[k], pad + 6 + 70 * k, pad / 2 + 12);
  });
}

function plotPath(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const scale = (w - 40) / 5;
  const px = (x) => w / 2 + x * scale, py = (y) => h / 2 - y * scale;
  ctx.strokeStyle = "#ccc";
  ctx.beginPath(); ctx.arc(w / 2, h / 2, 2 * scale, 0, 2 * Math.PI); ctx.stroke();
  ctx.strokeStyle = COLORS[0];
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ys[i])) : ctx.moveTo(px(x), py(ys[i]))));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText("x-y path (r = 2 m)", 6, 14);
}

function drawRun() {
  if (!lastRun) return;
  const p = Number($("prop").value);
  const t = lastRun.times();
  plot($("tilts"), t, [lastRun.actuator(0, p), lastRun.actuator(1, p)], [`alpha${p + 1}`, `beta${p + 1}`]);
  plotPath($("path"), lastRun.position_x(), lastRun.position_y());
  plot($("cost"), t, [lastRun.objective()], ["J"]);
}

function simulate() {
  $("status").textContent = "simulating...";
  // let the status repaint before the blocking call
  setTimeout(() => {
    try {
      const started = performance.now();
      if (lastRun) lastRun.free();
      lastRun = simulate_circle(Number($("gj").value), $("obj").value, Number($("dur").value), 20);
      $("summary").textContent = `${lastRun.summary()} (${((performance.now() - started) / 1000).toFixed(1)} s)`;
      $("fit").disabled = false;
      drawRun();
      $("status").textContent = "ready";
    } catch (e) {
      $("status").textContent = `error: ${e.message ?? e}`;
    }
  }, 10);
}

function explore() {
  const a = Number($("ea").value), b = Number($("eb").value), w = Number($("ew").value);
  $("ea-v").textContent = a; $("eb-v").textContent = b; $("ew-v").textContent = w;
  const r = explore_wrench(a, b, w);
  const f = (v) => v.toFixed(4).padStart(10);
  $("wrench").textContent =
    `force  [N]  ${f(r[0])} ${f(r[1])} ${f(r[2])}\n` +
    `torque [Nm] ${f(r[3])} ${f(r[4])} ${f(r[5])}\n` +
    `sigma_min of the wrench Jacobian: ${r[6].toExponential(3)}\n` +
    `(tilts beyond +-30 deg and spins outside [100, 1000] rad/s are clipped)`;
}

function fit() {
  try {
    $("table").textContent = lastRun.table(Number($("win").value));
  } catch (e) {
    $("table").textContent = `error: ${e.message ?? e}`;
  }
}

await init();
$("status").textContent = "ready";
$("simulate").disabled = false;
$("simulate").onclick = simulate;
$("prop").onchange = drawRun;
$("fit").onclick = fit;
for (const id of ["ea", "eb", "ew"]) $(id).oninput = explore;
explore();
