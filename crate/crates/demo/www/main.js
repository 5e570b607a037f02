import init, { solveTraces, profile, sphereStep, problemNames } from "./pkg/hybrid_rcg_demo.js";

const COLORS = { DY: "#1f77b4", PRP: "#d62728", Hybrid1: "#2ca02c", Hybrid2: "#ff7f0e" };
const $ = (id) => document.getElementById(id);

function setStatus(el, text, isError = false) {
  el.textContent = text;
  el.classList.toggle("error", isError);
}

// Axes plus one polyline per series. Series: {label, xs, ys}.
function plot(canvas, series, { logY = false, logX = false, xLabel = "", yLabel = "", step = false, yRange } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const L = 70, R = 130, T = 16, B = 40;
  ctx.clearRect(0, 0, W, H);
  const tx = (v) => (logX ? Math.log2(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  const finite = (v) => Number.isFinite(v) && (!logY || v > 0);
  let xs = [], ys = [];
  for (const s of series) {
    s.xs.forEach((x, i) => { if (finite(s.ys[i]) && Number.isFinite(x)) { xs.push(tx(x)); ys.push(ty(s.ys[i])); } });
  }
  if (!xs.length) return;
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = yRange ? yRange.map(ty) : [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 1; y1 += 1; }
  const sx = (v) => L + ((tx(v) - x0) / (x1 - x0)) * (W - L - R);
  const sy = (v) => T + (1 - (ty(v) - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#444"; ctx.fillStyle = "#222"; ctx.lineWidth = 1; ctx.font = "12px sans-serif";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  for (let i = 0; i <= 5; i++) {
    const a = x0 + (i / 5) * (x1 - x0);
    const v = logX ? 2 ** a : a;
    const px = L + (i / 5) * (W - L - R);
    ctx.textAlign = "center";
    ctx.fillText(Number(v.toPrecision(3)).toString(), px, H - B + 16);
    const b = y0 + (i / 5) * (y1 - y0);
    const w = logY ? 10 ** b : b;
    ctx.textAlign = "right";
    ctx.fillText(logY ? w.toExponential(0) : Number(w.toPrecision(3)).toString(), L - 6, T + (1 - i / 5) * (H - T - B) + 4);
  }
  ctx.textAlign = "center";
  ctx.fillText(xLabel, L + (W - L - R) / 2, H - 6);
  ctx.save(); ctx.translate(14, T + (H - T - B) / 2); ctx.rotate(-Math.PI / 2); ctx.fillText(yLabel, 0, 0); ctx.restore();

  series.forEach((s, k) => {
    const color = COLORS[s.label] || "#555";
    ctx.strokeStyle = color; ctx.lineWidth = 2; ctx.beginPath();
    let started = false, prevY = null;
    s.xs.forEach((x, i) => {
      const y = s.ys[i];
      if (!finite(y)) return;
      const px = sx(x), py = sy(y);
      if (!started) { ctx.moveTo(px, py); started = true; }
      else { if (step && prevY !== null) ctx.lineTo(px, prevY); ctx.lineTo(px, py); }
      prevY = py;
    });
    ctx.stroke();
    const ly = T + 14 + 18 * k;
    ctx.beginPath(); ctx.moveTo(W - R + 12, ly); ctx.lineTo(W - R + 34, ly); ctx.stroke();
    ctx.fillStyle = "#222"; ctx.textAlign = "left"; ctx.fillText(s.label, W - R + 40, ly + 4);
  });
}

function table(el, header, rows) {
  el.innerHTML = "";
  const tr = el.insertRow();
  header.forEach((h) => { const th = document.createElement("th"); th.textContent = h; tr.appendChild(th); });
  rows.forEach((r) => { const row = el.insertRow(); r.forEach((c) => { row.insertCell().textContent = c; }); });
}

let lastRuns = null;

function drawTraces() {
  if (!lastRuns) return;
  const which = $("trace-y").value;
  const fmin = Math.min(...lastRuns.flatMap((r) => r.f));
  const series = lastRuns.map((r) => ({
    label: r.algorithm,
    xs: r.k,
    ys: which === "f" ? r.f.map((v) => v - fmin) : r.grad_norm,
  }));
  plot($("trace-canvas"), series, { logY: true, xLabel: "iteration", yLabel: which === "f" ? "f - min f" : "|grad f|" });
}

function runSolve() {
  const status = $("solve-status");
  try {
    const t0 = performance.now();
    lastRuns = JSON.parse(solveTraces($("problem").value, $("small").checked, Number($("seed").value) || 1));
    setStatus(status, `solved in ${((performance.now() - t0) / 1000).toFixed(2)} s`);
    drawTraces();
    table($("solve-table"), ["rule", "converged", "iterations", "restarts", "final f"],
      lastRuns.map((r) => [r.algorithm, r.converged ? "yes" : "no", r.iterations, r.restarts, r.final_cost.toPrecision(10)]));
  } catch (e) {
    setStatus(status, String(e), true);
  }
}

function runProfile() {
  const status = $("profile-status");
  setStatus(status, "running…");
  // let the status paint before the blocking run
  setTimeout(() => {
    try {
      const res = JSON.parse(profile($("metric").value, Number($("seeds").value) || 1));
      const logTau = $("log-tau").checked;
      const taus = res.curves.flatMap((c) => c.points.map((p) => p[0]));
      const tauMax = Math.max(2, ...taus) * 1.05;
      const series = res.curves.map((c) => {
        const xs = [1], ys = [c.points.length && c.points[0][0] <= 1 ? c.points[0][1] : 0];
        c.points.filter((p) => p[0] > 1).forEach((p) => { xs.push(p[0]); ys.push(p[1]); });
        xs.push(tauMax); ys.push(ys[ys.length - 1]);
        return { label: c.algorithm, xs, ys };
      });
      plot($("profile-canvas"), series, { step: true, logX: logTau, xLabel: "tau", yLabel: "P(tau)", yRange: [0, 1] });
      setStatus(status, `${res.runs} runs, ${res.unsolved} not converged`);
      table($("profile-table"), ["rule", "mean", "std", "min", "median", "max"],
        res.stats.map((s) => [s.algorithm, s.mean, s.std, s.min, s.median, s.max].map((v, i) => (i ? Number(v).toPrecision(4) : v))));
    } catch (e) {
      setStatus(status, String(e), true);
    }
  }, 20);
}

// Sphere view: rotate so the camera looks from (azimuth, elevation).
function view(lon) {
  const az = lon - 0.7, el = 0.35;
  return ([x, y, z]) => {
    const x1 = x * Math.cos(-az) - y * Math.sin(-az);
    const y1 = x * Math.sin(-az) + y * Math.cos(-az);
    const x2 = x1 * Math.cos(el) + z * Math.sin(el);
    const z2 = -x1 * Math.sin(el) + z * Math.cos(el);
    return { u: y1, v: z2, depth: x2 };
  };
}

function drawSphere() {
  const lon = Number($("lon").value), lat = Number($("lat").value);
  const ed = Number($("eta-dir").value), el = Number($("eta-len").value), xd = Number($("xi-dir").value);
  const eLon = [-Math.sin(lon), Math.cos(lon), 0];
  const eLat = [-Math.sin(lat) * Math.cos(lon), -Math.sin(lat) * Math.sin(lon), Math.cos(lat)];
  const comb = (a, b, t, s) => a.map((v, i) => s * (Math.cos(t) * v + Math.sin(t) * b[i]));
  let st;
  try {
    st = JSON.parse(sphereStep(lon, lat, comb(eLon, eLat, ed, el), comb(eLon, eLat, xd, 0.8)));
  } catch (e) {
    $("sphere-info").textContent = String(e);
    return;
  }
  const canvas = $("sphere-canvas"), ctx = canvas.getContext("2d");
  const W = canvas.width, c = W / 2, r = W * 0.36;
  const P = view(lon);
  const px = (p) => { const q = P(p); return [c + r * q.u, c - r * q.v, q.depth]; };
  ctx.clearRect(0, 0, W, W);
  ctx.strokeStyle = "#999"; ctx.lineWidth = 1;
  ctx.beginPath(); ctx.arc(c, c, r, 0, 2 * Math.PI); ctx.stroke();
  // graticule
  ctx.strokeStyle = "#e4e4e4";
  for (let k = -2; k <= 2; k++) {
    ctx.beginPath();
    for (let i = 0; i <= 72; i++) {
      const a = (i / 72) * 2 * Math.PI, b = (k * Math.PI) / 6;
      const [u, v, d] = px([Math.cos(b) * Math.cos(a), Math.cos(b) * Math.sin(a), Math.sin(b)]);
      if (d >= 0) ctx.lineTo(u, v); else ctx.moveTo(u, v);
    }
    ctx.stroke();
  }
  const arrow = (from, vec, color, label) => {
    const to = from.map((v, i) => v + vec[i]);
    const [u0, v0] = px(from), [u1, v1] = px(to);
    ctx.strokeStyle = color; ctx.fillStyle = color; ctx.lineWidth = 2.5;
    ctx.beginPath(); ctx.moveTo(u0, v0); ctx.lineTo(u1, v1); ctx.stroke();
    const ang = Math.atan2(v1 - v0, u1 - u0);
    ctx.beginPath(); ctx.moveTo(u1, v1);
    ctx.lineTo(u1 - 9 * Math.cos(ang - 0.4), v1 - 9 * Math.sin(ang - 0.4));
    ctx.lineTo(u1 - 9 * Math.cos(ang + 0.4), v1 - 9 * Math.sin(ang + 0.4));
    ctx.fill();
    ctx.font = "13px sans-serif"; ctx.fillText(label, u1 + 5, v1 - 5);
  };
  ctx.strokeStyle = "#333"; ctx.lineWidth = 2; ctx.setLineDash([5, 4]);
  ctx.beginPath(); st.path.forEach((p, i) => { const [u, v] = px(p); i ? ctx.lineTo(u, v) : ctx.moveTo(u, v); }); ctx.stroke();
  ctx.setLineDash([]);
  arrow(st.x, st.eta, "#888", "eta");
  arrow(st.x, st.xi, "#1f77b4", "xi");
  arrow(st.y, st.transported, "#d62728", "T xi");
  arrow(st.y, st.scaled, "#2ca02c", "scaled");
  arrow(st.y, st.projected, "#9467bd", "P_y xi");
  for (const [p, name] of [[st.x, "x"], [st.y, "R_x(eta)"]]) {
    const [u, v] = px(p);
    ctx.fillStyle = "#000"; ctx.beginPath(); ctx.arc(u, v, 4, 0, 2 * Math.PI); ctx.fill();
    ctx.fillText(name, u + 6, v + 14);
  }
  $("sphere-info").textContent =
    `|xi|           = ${st.xi_norm.toFixed(6)}\n` +
    `|T xi|         = ${st.transported_norm.toFixed(6)}\n` +
    `scale          = ${st.scale.toFixed(6)}\n` +
    `|scaled T xi|  = ${Math.hypot(...st.scaled).toFixed(6)}`;
}

async function main() {
  try {
    await init();
  } catch (e) {
    setStatus($("load-status"), `could not load pkg/hybrid_rcg_demo.js: ${e}`, true);
    return;
  }
  setStatus($("load-status"), "");
  const sel = $("problem");
  JSON.parse(problemNames()).forEach((n) => sel.add(new Option(n, n)));
  $("run-solve").onclick = runSolve;
  $("trace-y").onchange = drawTraces;
  $("run-profile").onclick = runProfile;
  for (const id of ["lon", "lat", "eta-dir", "eta-len", "xi-dir"]) $(id).oninput = drawSphere;
  drawSphere();
  runSolve();
}

main();
