import init, { Demo, potentialCurve, minimizer } from "./pkg/hdch_wasm.js";

const THETA0 = 2.0;
const N = 64;
const STEPS_PER_FRAME = 4;

const $ = (id) => document.getElementById(id);
const field = $("field");
const ctx = field.getContext("2d");
let demo = null;
let running = false;

function report(err) {
  $("error").textContent = err ? String(err.message ?? err) : "";
  if (err) stop();
}

function draw() {
  const pixels = new Uint8ClampedArray(demo.rgba());
  ctx.putImageData(new ImageData(pixels, N, N), 0, 0);
  const [t, mass, energy, sep, u] = demo.readout();
  $("readout").textContent =
    `t = ${t.toFixed(3)}   mean φ = ${(mass).toExponential(6)}\n` +
    `E = ${energy.toFixed(5)}   1 - ‖φ‖∞ = ${sep.toExponential(3)}   ‖u‖ = ${u.toExponential(3)}`;
}

function reset() {
  stop();
  try {
    const theta = Number($("theta").value);
    demo = new Demo(N, theta, Number($("nu2").value), Number($("mean").value), Number($("seed").value));
    report(null);
    draw();
  } catch (e) {
    report(e);
  }
}

function frame() {
  if (!running) return;
  try {
    demo.advance(STEPS_PER_FRAME);
    draw();
    requestAnimationFrame(frame);
  } catch (e) {
    report(e);
  }
}

function stop() {
  running = false;
  $("play").textContent = "Run";
}

function toggle() {
  if (running) return stop();
  running = true;
  $("play").textContent = "Pause";
  requestAnimationFrame(frame);
}

function paint(ev) {
  const box = field.getBoundingClientRect();
  const fx = (ev.clientX - box.left) / box.width;
  const fy = (ev.clientY - box.top) / box.height;
  const value = Number(document.querySelector("input[name=phase]:checked").value);
  try {
    demo.paint(fx, fy, Number($("radius").value), value);
    draw();
  } catch (e) {
    report(e);
  }
}

function plotPotential() {
  const theta = Number($("theta").value);
  $("theta-out").value = theta;
  const canvas = $("potential");
  const g = canvas.getContext("2d");
  g.clearRect(0, 0, canvas.width, canvas.height);
  const xy = potentialCurve(theta, THETA0, 400);
  let lo = Infinity, hi = -Infinity;
  for (let k = 1; k < xy.length; k += 2) {
    lo = Math.min(lo, xy[k]);
    hi = Math.max(hi, xy[k]);
  }
  const px = (s) => (0.5 * (s + 1)) * (canvas.width - 20) + 10;
  const py = (v) => canvas.height - 10 - ((v - lo) / (hi - lo || 1)) * (canvas.height - 20);
  g.strokeStyle = "#1f4e9c";
  g.lineWidth = 1.5;
  g.beginPath();
  for (let k = 0; k < xy.length; k += 2) {
    const [x, y] = [px(xy[k]), py(xy[k + 1])];
    k === 0 ? g.moveTo(x, y) : g.lineTo(x, y);
  }
  g.stroke();
  const beta = minimizer(theta, THETA0);
  $("beta").value = beta.toFixed(6);
  g.fillStyle = "#b22";
  for (const s of [-beta, beta]) g.fillRect(px(s) - 1, 10, 2, canvas.height - 20);
}

await init();
$("reset").addEventListener("click", reset);
$("play").addEventListener("click", toggle);
field.addEventListener("click", paint);
$("radius").addEventListener("input", () => ($("radius-out").value = $("radius").value));
$("theta").addEventListener("input", plotPotential);
$("theta").addEventListener("change", reset);
plotPotential();
reset();
