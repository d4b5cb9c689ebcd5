// Loads the wasm module built by `wasm-bindgen --target web` into ../pkg
// and wires the three operations to canvases. No framework, no bundler.

import init, { profile_curve, remainder_curve, symbol_heatmap } from "../pkg/oscsym_wasm.js";

const $ = (id) => document.getElementById(id);
const ROUTE_COLORS = { "series": "#2266cc", "even-closed": "#2a9d4e", "asymptotic": "#e08020" };

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.strokeRect(40.5, 10.5, w - 55, h - 45);
}

function drawCurve(data) {
  const cv = $("curve"), ctx = cv.getContext("2d");
  axes(ctx, cv.width, cv.height);
  const xs = data.t, ys = data.c;
  const ymax = Math.max(...ys), ymin = Math.min(0, Math.min(...ys));
  const px = (t) => 40 + (t - xs[0]) / (xs[xs.length - 1] - xs[0]) * (cv.width - 55);
  const py = (y) => 10 + (ymax - y) / (ymax - ymin || 1) * (cv.height - 45);
  for (let i = 1; i < xs.length; i++) {
    ctx.strokeStyle = ROUTE_COLORS[data.route[i]] || "#444";
    ctx.beginPath();
    ctx.moveTo(px(xs[i - 1]), py(ys[i - 1]));
    ctx.lineTo(px(xs[i]), py(ys[i]));
    ctx.stroke();
  }
  ctx.fillStyle = "#555";
  ctx.fillText(ymax.toPrecision(3), 2, 16);
  ctx.fillText("0", 28, cv.height - 32);
  ctx.fillText("t = " + xs[xs.length - 1], cv.width - 70, cv.height - 16);
}

function drawRemainder(data) {
  const cv = $("remainder"), ctx = cv.getContext("2d");
  axes(ctx, cv.width, cv.height);
  const pts = data.t.map((t, i) => [Math.log10(t), Math.log10(data.abs_err[i])])
    .filter(p => isFinite(p[0]) && isFinite(p[1]));
  if (!pts.length) return;
  const x0 = pts[0][0], x1 = pts[pts.length - 1][0];
  const y1 = Math.max(...pts.map(p => p[1])), y0 = Math.min(...pts.map(p => p[1]));
  const px = (x) => 40 + (x - x0) / (x1 - x0 || 1) * (cv.width - 55);
  const py = (y) => 10 + (y1 - y) / (y1 - y0 || 1) * (cv.height - 45);
  ctx.strokeStyle = "#cc3355";
  ctx.beginPath();
  pts.forEach(([x, y], i) => i ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y)));
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.fillText("1e" + y1.toFixed(0), 2, 16);
  ctx.fillText("1e" + y0.toFixed(0), 2, cv.height - 36);
  $("slope").textContent = data.slope === null
    ? "(exponential regime)"
    : "fitted slope " + data.slope + (data.exponential_regime ? " (exponential regime)" : "");
}

function drawHeatmap(data) {
  const cv = $("heatmap"), ctx = cv.getContext("2d");
  const n = data.n, cell = cv.width / n;
  const vmax = Math.max(...data.values);
  for (let iy = 0; iy < n; iy++) {
    for (let ix = 0; ix < n; ix++) {
      const v = data.values[iy * n + ix] / vmax;
      const hue = 240 - 200 * v;
      ctx.fillStyle = `hsl(${hue} 75% ${25 + 45 * v}%)`;
      ctx.fillRect(ix * cell, (n - 1 - iy) * cell, cell + 1, cell + 1);
    }
  }
}

function compute() {
  const dim = +$("dim").value, terms = +$("terms").value;
  const tmax = +$("tmax").value, bits = +$("bits").value;
  $("status").textContent = "";
  try {
    const curve = JSON.parse(profile_curve(dim, 0, tmax, 240, bits));
    if (curve.error) throw new Error(curve.error);
    drawCurve(curve);
    const rem = JSON.parse(remainder_curve(dim, terms, 10, 200, 40));
    if (rem.error) throw new Error(rem.error);
    drawRemainder(rem);
    const heat = JSON.parse(symbol_heatmap(dim, Math.sqrt(tmax), 96, Math.min(bits, 128)));
    if (heat.error) throw new Error(heat.error);
    drawHeatmap(heat);
  } catch (e) {
    $("status").textContent = e.message;
  }
}

init().then(() => {
  $("go").addEventListener("click", compute);
  compute();
});
