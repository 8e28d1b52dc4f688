// Demo page wiring. Expects the wasm-pack output in ./pkg (see README).
import init, { synth_preview, smooth_preview, confusion_metrics } from "./pkg/stresslab_wasm.js";

const $ = (id) => document.getElementById(id);

function clearCanvas(canvas) {
  const ctx = canvas.getContext("2d");
  const dpr = window.devicePixelRatio || 1;
  canvas.width = canvas.clientWidth * dpr;
  canvas.height = canvas.clientHeight * dpr;
  ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
  ctx.clearRect(0, 0, canvas.clientWidth, canvas.clientHeight);
  return ctx;
}

function plotLines(canvas, seriesList, colors) {
  const ctx = clearCanvas(canvas);
  const w = canvas.clientWidth, h = canvas.clientHeight;
  seriesList.forEach((series, si) => {
    if (!series.length) return;
    let lo = Math.min(...series), hi = Math.max(...series);
    if (hi === lo) { hi += 1; lo -= 1; }
    const lane = h / seriesList.length;
    const y0 = si * lane;
    ctx.beginPath();
    series.forEach((v, i) => {
      const x = (i / (series.length - 1)) * (w - 8) + 4;
      const y = y0 + lane - 6 - ((v - lo) / (hi - lo)) * (lane - 12);
      if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    });
    ctx.strokeStyle = colors[si % colors.length];
    ctx.lineWidth = 1.2;
    ctx.stroke();
  });
}

function plotGroupedBars(canvas, groups, keys, colors) {
  const ctx = clearCanvas(canvas);
  const w = canvas.clientWidth, h = canvas.clientHeight;
  const values = groups.flatMap((g) => keys.map((k) => g[k]));
  const logs = values.map((v) => Math.log10(Math.max(v, 1e-6)));
  const lo = Math.min(...logs) - 0.2, hi = Math.max(...logs) + 0.2;
  const groupW = w / groups.length;
  const barW = (groupW * 0.7) / keys.length;
  ctx.font = "12px system-ui";
  groups.forEach((g, gi) => {
    keys.forEach((k, ki) => {
      const lv = Math.log10(Math.max(g[k], 1e-6));
      const frac = (lv - lo) / (hi - lo);
      const x = gi * groupW + groupW * 0.15 + ki * barW;
      const bh = frac * (h - 34);
      ctx.fillStyle = colors[ki % colors.length];
      ctx.fillRect(x, h - 20 - bh, barW - 2, bh);
    });
    ctx.fillStyle = "#888";
    ctx.textAlign = "center";
    ctx.fillText(g.band, gi * groupW + groupW / 2, h - 6);
  });
}

const palette = ["#4c78a8", "#f58518", "#54a24b", "#e45756"];

function runSynth() {
  const seed = Number($("synth-seed").value) >>> 0;
  const cls = $("synth-class").value;
  const effect = Number($("synth-effect").value);
  const duration = Number($("synth-duration").value);
  $("synth-effect-val").textContent = effect.toFixed(1);
  const reply = JSON.parse(synth_preview(seed, cls, effect, duration));
  if (reply.error) {
    $("synth-meta").innerHTML = `<span class="err">${reply.error}</span>`;
    return;
  }
  $("synth-meta").textContent =
    `planted ${reply.planted_class}, drawn PSS score ${reply.pss_score}, ` +
    `${reply.duration_seconds} s at 256 Hz`;
  const eeg = reply.traces.find((t) => t.name === "TP9");
  plotLines($("synth-eeg"), [eeg.samples], palette);
  const gsr = reply.traces.find((t) => t.name === "GSR");
  const ppg = reply.traces.find((t) => t.name === "PPG");
  plotLines($("synth-peripheral"), [gsr.samples, ppg.samples], [palette[2], palette[3]]);
  plotGroupedBars($("synth-bands"), reply.band_power, ["tp9", "af7", "af8", "tp10"], palette);
}

function runSmooth() {
  const reply = JSON.parse(smooth_preview(
    Number($("sg-window").value) >>> 0,
    Number($("sg-order").value) >>> 0,
    Number($("sg-noise").value),
    Number($("sg-seed").value) >>> 0,
  ));
  $("sg-noise-val").textContent = Number($("sg-noise").value).toFixed(2);
  if (reply.error) {
    $("sg-error").textContent = reply.error;
    return;
  }
  $("sg-error").textContent = "";
  const canvas = $("sg-plot");
  const ctx = clearCanvas(canvas);
  const w = canvas.clientWidth, h = canvas.clientHeight;
  const all = reply.raw.concat(reply.smoothed);
  const lo = Math.min(...all), hi = Math.max(...all);
  const draw = (series, color, width) => {
    ctx.beginPath();
    series.forEach((v, i) => {
      const x = (i / (series.length - 1)) * (w - 8) + 4;
      const y = h - 6 - ((v - lo) / (hi - lo)) * (h - 12);
      if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    });
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.stroke();
  };
  draw(reply.raw, "#9996", 1);
  draw(reply.smoothed, palette[0], 2);
}

function runMetrics() {
  const reply = JSON.parse(confusion_metrics($("cm-text").value));
  const out = $("cm-out");
  if (reply.error) {
    out.innerHTML = `<p class="err">${reply.error}</p>`;
    return;
  }
  const pct = (v) => (v * 100).toFixed(2) + "%";
  const num = (v) => v.toFixed(3);
  let rows = reply.classes.map((c, i) =>
    `<tr><td>${c}</td><td>${num(reply.precision[i])}</td><td>${num(reply.recall[i])}</td>` +
    `<td>${num(reply.f1[i])}</td><td>${reply.support[i]}</td></tr>`).join("");
  out.innerHTML =
    `<p>accuracy <b>${pct(reply.accuracy)}</b> · weighted F ${num(reply.weighted_f1)} · ` +
    `macro F ${num(reply.macro_f1)} · kappa ${num(reply.kappa)}</p>` +
    `<table><tr><th>class</th><th>precision</th><th>recall</th><th>F1</th><th>support</th></tr>${rows}</table>`;
}

await init();
for (const id of ["synth-seed", "synth-class", "synth-effect", "synth-duration"]) {
  $(id).addEventListener("change", runSynth);
}
$("synth-go").addEventListener("click", runSynth);
for (const id of ["sg-window", "sg-order", "sg-noise", "sg-seed"]) {
  $(id).addEventListener("input", runSmooth);
}
$("cm-go").addEventListener("click", runMetrics);
runSynth();
runSmooth();
runMetrics();
