import init, { ber_curve, compare_schemes, cipher_demo } from "./pkg/phykey_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

// Draws line series on a canvas. Each series is {label, points: [[x, y]], dashed}.
function plot(canvas, series, { logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 130, T = 15, B = 40;
  ctx.clearRect(0, 0, W, H);
  const ty = (y) => (logY ? Math.log10(y) : y);
  const pts = series.flatMap((s) => s.points).filter(([x, y]) => isFinite(x) && isFinite(ty(y)));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => ty(p[1]))), Math.max(...pts.map((p) => ty(p[1])))];
  if (logY) { y0 = Math.floor(y0); y1 = Math.ceil(y1); }
  if (x0 === x1) x1 = x0 + 1;
  if (y0 === y1) y1 = y0 + 1;
  const sx = (x) => L + ((x - x0) / (x1 - x0)) * (W - L - R);
  const sy = (y) => H - B - ((ty(y) - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#888"; ctx.fillStyle = "#333"; ctx.font = "11px sans-serif";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  for (let i = 0; i <= 5; i++) {
    const x = x0 + ((x1 - x0) * i) / 5;
    ctx.fillText(x.toFixed(1), sx(x) - 8, H - B + 14);
    const yv = y0 + ((y1 - y0) * i) / 5;
    ctx.fillText(logY ? `1e${yv.toFixed(1)}` : yv.toFixed(3), 4, H - B - ((yv - y0) / (y1 - y0)) * (H - T - B) + 4);
  }
  ctx.fillText(xLabel, (W - R) / 2, H - 6);
  ctx.save(); ctx.translate(12, H / 2); ctx.rotate(-Math.PI / 2); ctx.fillText(yLabel, 0, 0); ctx.restore();

  series.forEach((s, i) => {
    ctx.strokeStyle = ctx.fillStyle = s.color || COLORS[i % COLORS.length];
    ctx.setLineDash(s.dashed ? [5, 4] : []);
    ctx.beginPath();
    let started = false;
    for (const [x, y] of s.points) {
      if (!isFinite(x) || !isFinite(ty(y))) { started = false; continue; }
      started ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y));
      started = true;
    }
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillRect(W - R + 10, T + 10 + i * 16, 14, 3);
    ctx.fillText(s.label, W - R + 30, T + 15 + i * 16);
  });
}

function drawGray(canvas, size, pixels) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(size, size);
  pixels.forEach((v, i) => { img.data.set([v, v, v, 255], 4 * i); });
  const tmp = document.createElement("canvas");
  tmp.width = tmp.height = size;
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function guarded(errId, fn) {
  return () => {
    $(errId).textContent = "";
    try { fn(); } catch (e) { $(errId).textContent = String(e); }
  };
}

function runBer() {
  const rows = JSON.parse(ber_curve(+$("ber-bits").value, $("ber-ebn0").value, +$("ber-order").value, +$("ber-seed").value));
  plot($("ber-plot"), [
    { label: "simulated", points: rows.map((r) => [r.ebn0_db, r.ber]) },
    { label: "BPSK theory", points: rows.map((r) => [r.ebn0_db, r.theory]), dashed: true, color: "#555" },
  ], { logY: true, xLabel: "Eb/N0 (dB)", yLabel: "BER" });
}

function runKeygen() {
  const rows = JSON.parse(compare_schemes(+$("kg-probes").value, $("kg-snr").value, +$("kg-sectors").value,
    +$("kg-coh").value, +$("kg-trials").value, +$("kg-seed").value));
  const by = (s) => rows.filter((r) => r.scheme === s);
  plot($("kg-plot"), [
    { label: "rss kdp", points: by("rss").map((r) => [r.snr_db, r.kdp]) },
    { label: "phase kdp", points: by("phase").map((r) => [r.snr_db, r.kdp]) },
    { label: "eve (phase)", points: by("phase").map((r) => [r.snr_db, r.eve_kdp]), dashed: true },
  ], { xLabel: "SNR (dB)", yLabel: "key disagreement" });
  const head = "<tr><th>scheme</th><th>SNR</th><th>kdp</th><th>kgr</th><th>monobit p</th><th>eve kdp</th></tr>";
  $("kg-table").innerHTML = head + rows.map((r) =>
    `<tr><td>${r.scheme}</td><td>${r.snr_db}</td><td>${r.kdp.toFixed(4)}</td><td>${r.kgr.toFixed(3)}</td>` +
    `<td>${r.monobit_p.toFixed(3)}</td><td>${r.eve_kdp.toFixed(3)}</td></tr>`).join("");
}

function runCipher() {
  const d = JSON.parse(cipher_demo(+$("ci-size").value, +$("ci-k2").value));
  drawGray($("ci-plain"), d.size, d.plain);
  drawGray($("ci-cipher"), d.size, d.cipher);
  $("ci-info").textContent = `decrypted exactly: ${d.decrypted_ok}; scalability factor ${d.scalability_factor.toFixed(2)}; ` +
    `monobit p of displayed ciphertext bytes ${d.cipher_monobit_p.toExponential(2)}`;
}

init().then(() => {
  $("status").textContent = "Ready. All simulations run locally in the browser.";
  $("ber-run").onclick = guarded("ber-err", runBer);
  $("kg-run").onclick = guarded("kg-err", runKeygen);
  $("ci-run").onclick = guarded("ci-err", runCipher);
  guarded("ber-err", runBer)();
  guarded("ci-err", runCipher)();
}).catch((e) => { $("status").textContent = `Failed to load: ${e}`; });
