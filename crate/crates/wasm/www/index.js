import init, { bound_curves, frame_profile, channel_scatter } from "./pkg/nerf_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function run(outId, f) {
  const out = $(outId);
  out.classList.remove("err");
  try {
    return f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e);
    return null;
  }
}

// series: [{label, xs, ys, points?}]; null ys are skipped.
function plot(canvas, series, { xlabel, ylabel, logx = false, logy = false, diagonal = false }) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 50;
  ctx.clearRect(0, 0, W, H);
  const tx = logx ? Math.log10 : (v) => v;
  const ty = logy ? Math.log10 : (v) => v;
  const all = series.flatMap((s) => s.xs.map((x, i) => [x, s.ys[i]]))
    .filter(([x, y]) => y !== null && Number.isFinite(x) && Number.isFinite(y) && (!logx || x > 0) && (!logy || y > 0));
  if (all.length === 0) return;
  let [x0, x1] = [Math.min(...all.map((p) => tx(p[0]))), Math.max(...all.map((p) => tx(p[0])))];
  let [y0, y1] = [Math.min(...all.map((p) => ty(p[1]))), Math.max(...all.map((p) => ty(p[1])))];
  if (diagonal) { x0 = y0 = Math.min(x0, y0); x1 = y1 = Math.max(x1, y1); }
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const sx = (x) => pad + (tx(x) - x0) / (x1 - x0) * (W - 2 * pad);
  const sy = (y) => H - pad - (ty(y) - y0) / (y1 - y0) * (H - 2 * pad);

  ctx.strokeStyle = "#444";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  const fmt = (v, log) => (log ? Math.pow(10, v) : v).toPrecision(3);
  ctx.fillText(fmt(x0, logx), pad, H - pad + 15);
  ctx.fillText(fmt(x1, logx), W - pad - 30, H - pad + 15);
  ctx.fillText(fmt(y0, logy), 5, H - pad);
  ctx.fillText(fmt(y1, logy), 5, pad + 10);
  ctx.fillText(xlabel, W / 2 - 20, H - 10);
  ctx.fillText(ylabel, 5, pad - 15);
  if (diagonal) {
    ctx.strokeStyle = "#aaa";
    ctx.beginPath();
    ctx.moveTo(sx(Math.pow(10, x0)), sy(Math.pow(10, y0)));
    ctx.lineTo(sx(Math.pow(10, x1)), sy(Math.pow(10, y1)));
    ctx.stroke();
  }

  series.forEach((s, k) => {
    const color = COLORS[k % COLORS.length];
    ctx.strokeStyle = ctx.fillStyle = color;
    if (s.points) {
      s.xs.forEach((x, i) => {
        if (s.ys[i] === null || !(x > 0) || !(s.ys[i] > 0)) return;
        ctx.fillRect(sx(x) - 1.5, sy(s.ys[i]) - 1.5, 3, 3);
      });
    } else {
      ctx.beginPath();
      let pen = false;
      s.xs.forEach((x, i) => {
        const y = s.ys[i];
        if (y === null || !Number.isFinite(y)) { pen = false; return; }
        pen ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y));
        pen = true;
      });
      ctx.stroke();
    }
    ctx.fillText(s.label, W - pad - 150, pad + 15 + 15 * k);
  });
}

function curves() {
  const v = run("cv-out", () => JSON.parse(bound_curves(num("cv-m"), num("cv-cmin"), num("cv-cmax"), 200)));
  if (!v) return;
  const flat = (y) => v.c.map(() => y);
  plot($("cv-plot"), [
    { label: "singer-etf", xs: v.c, ys: v.etf },
    { label: `mub, M = ${v.m}`, xs: v.c, ys: v.mub },
    { label: `group, M = ${v.m}`, xs: v.c, ys: v.group },
    { label: "random-erasure threshold", xs: v.c, ys: v.threshold },
    { label: "gaussian limit", xs: v.c, ys: flat(v.gaussian_max_p) },
  ], { xlabel: "C", ylabel: "max p" });
  const last = v.c.length - 1;
  $("cv-out").textContent =
    `at C = ${v.c[last]}: etf ${v.etf[last].toFixed(5)}, mub ${v.mub[last]?.toFixed(5) ?? "n/a"}, ` +
    `group ${v.group[last]?.toFixed(5) ?? "n/a"}, threshold ${v.threshold[last].toFixed(5)}, ` +
    `gaussian ${v.gaussian_max_p.toFixed(5)}`;
}

function profile() {
  const v = run("pf-out", () => JSON.parse(frame_profile(
    $("pf-family").value, num("pf-param"), num("pf-erased"), num("pf-c"), num("pf-trials"), num("pf-seed"))));
  if (!v) return;
  const cert = v.certificate;
  const finite = v.sampled_conds.filter((c) => c !== null);
  const bins = 30;
  const lo = Math.min(...finite), hi = Math.max(...finite);
  const width = (hi - lo) / bins || 1;
  const counts = new Array(bins).fill(0);
  finite.forEach((c) => counts[Math.min(bins - 1, Math.floor((c - lo) / width))]++);
  const centers = counts.map((_, i) => lo + (i + 0.5) * width);
  plot($("pf-plot"), [{ label: "random patterns", xs: centers, ys: counts }],
    { xlabel: "cond", ylabel: "count" });
  const worst = cert.worst;
  const lines = [
    `${v.family}: M = ${v.m}, N = ${v.n}, K = ${v.k}`,
    `verdict: ${cert.verdict}` + (cert.rank_deficient_by_counting ? " (rank deficient by counting)" : ""),
  ];
  if (worst) lines.push(`worst cond ${worst.cond} by ${worst.method} (work ${worst.work}), erased ${JSON.stringify(erasedOf(worst.pattern))}`);
  lines.push(`random patterns: ${finite.length} finite, ${v.sampled_conds.length - finite.length} singular`);
  for (const a of cert.analytic) {
    lines.push(`${a.bound.formula_id}: holds ${a.bound.holds}, margin ${a.bound.margin.toPrecision(4)}` +
      (a.cond_bound !== undefined ? `, cond <= ${a.cond_bound}` : ""));
  }
  $("pf-out").textContent = lines.join("\n");
}

function erasedOf(pattern) {
  const keep = new Set(pattern.survivors);
  return [...Array(pattern.n).keys()].filter((j) => !keep.has(j));
}

function channel() {
  const v = run("ch-out", () => JSON.parse(channel_scatter(
    $("ch-family").value, num("ch-param"), num("ch-p"), num("ch-trials"), num("ch-noise"), num("ch-seed"))));
  if (!v) return;
  plot($("ch-plot"), [{
    label: "trials",
    xs: v.points.map((p) => p.cond_bound_ratio),
    ys: v.points.map((p) => p.error_ratio),
    points: true,
  }], { xlabel: "cond / SNR", ylabel: "relative error", logx: true, logy: true, diagonal: true });
  $("ch-out").textContent =
    `M = ${v.m}, N = ${v.n}: ${v.points.length} decoded, ${v.rank_deficient_draws} rank-deficient draws, ` +
    `max(error - cond/SNR) = ${v.max_excess.toExponential(3)}`;
}

await init();
$("cv-run").onclick = curves;
$("pf-run").onclick = profile;
$("ch-run").onclick = channel;
curves();
