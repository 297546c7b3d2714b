import init, { latticeCounts, windingFiber, circleFlatNorm } from "./pkg/bldlab_web.js";

const $ = (id) => document.getElementById(id);

function frame(canvas, extent) {
  const ctx = canvas.getContext("2d");
  const w = canvas.height;
  const s = w / (2 * extent);
  return {
    ctx,
    x: (u) => w / 2 + u * s,
    y: (v) => w / 2 - v * s,
    s,
  };
}

function showError(where, e) {
  where.innerHTML = `<span class="err">${e}</span>`;
}

function drawCounts() {
  const r = Number($("rmax").value);
  $("rlabel").textContent = r;
  const table = $("counts-table");
  let data;
  try {
    data = JSON.parse(latticeCounts(Number($("px").value), Number($("py").value), r));
  } catch (e) {
    showError(table, e);
    return;
  }
  const canvas = $("counts-canvas");
  const f = frame(canvas, r * 1.05);
  f.ctx.clearRect(0, 0, canvas.width, canvas.height);
  f.ctx.strokeStyle = "#36c";
  f.ctx.beginPath();
  f.ctx.arc(f.x(0), f.y(0), r * f.s, 0, 2 * Math.PI);
  f.ctx.stroke();
  f.ctx.fillStyle = "#222";
  for (const [u, v] of data.points) {
    f.ctx.fillRect(f.x(u) - 1, f.y(v) - 1, 2, 2);
  }
  const rows = data.rows
    .map((row) => `<tr><td>${row.radius}</td><td>${row.count}</td><td>${row.a_f.toFixed(3)}</td>` +
      `<td>${row.ratio.toFixed(4)}</td><td>${row.bound.toFixed(4)}</td></tr>`)
    .join("");
  table.innerHTML = `<tr><th>R</th><th>count</th><th>A_f</th><th>ratio</th><th>bound</th></tr>${rows}`;
}

let target = [0.5, 0.3];

function drawWinding() {
  const canvas = $("winding-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const half = canvas.width / 2;
  const s = half / 2.4;
  const disk = (ox) => {
    ctx.strokeStyle = "#999";
    ctx.beginPath();
    ctx.arc(ox + half / 2, canvas.height / 2, s, 0, 2 * Math.PI);
    ctx.stroke();
  };
  disk(0);
  disk(half);
  const dot = (ox, u, v, color, size) => {
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(ox + half / 2 + u * s, canvas.height / 2 - v * s, size, 0, 2 * Math.PI);
    ctx.fill();
  };
  dot(half, target[0], target[1], "#c33", 5);
  let fiber;
  try {
    fiber = JSON.parse(windingFiber(Number($("degree").value), target[0], target[1]));
  } catch (e) {
    ctx.fillStyle = "#b00";
    ctx.fillText(String(e), 10, 20);
    return;
  }
  for (const p of fiber) {
    dot(0, p.x, p.y, "#36c", 3 + 2 * p.index);
  }
  ctx.fillStyle = "#222";
  ctx.fillText(`${fiber.length} preimages, indices sum to ${fiber.reduce((a, p) => a + p.index, 0)}`, 10, 20);
}

function drawFilling() {
  const info = $("filling-info");
  let data;
  try {
    data = JSON.parse(circleFlatNorm(Number($("ring").value), Number($("spacing").value)));
  } catch (e) {
    showError(info, e);
    return;
  }
  info.textContent = `radius ${data.radius.toFixed(3)}, mass ${data.mass.toFixed(4)}, flat norm ${data.flat_norm.toFixed(4)}`;
  const canvas = $("filling-canvas");
  const f = frame(canvas, 1.6);
  f.ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (const [tri, a] of data.triangles) {
    f.ctx.fillStyle = a > 0 ? "rgba(50,100,200,0.5)" : "rgba(200,60,60,0.5)";
    f.ctx.beginPath();
    f.ctx.moveTo(f.x(tri[0][0]), f.y(tri[0][1]));
    f.ctx.lineTo(f.x(tri[1][0]), f.y(tri[1][1]));
    f.ctx.lineTo(f.x(tri[2][0]), f.y(tri[2][1]));
    f.ctx.closePath();
    f.ctx.fill();
  }
  f.ctx.strokeStyle = "#c33";
  f.ctx.lineWidth = 2;
  for (const [seg] of data.residual) {
    f.ctx.beginPath();
    f.ctx.moveTo(f.x(seg[0][0]), f.y(seg[0][1]));
    f.ctx.lineTo(f.x(seg[1][0]), f.y(seg[1][1]));
    f.ctx.stroke();
  }
}

await init();
for (const id of ["px", "py", "rmax"]) $(id).addEventListener("input", drawCounts);
$("degree").addEventListener("input", drawWinding);
$("winding-canvas").addEventListener("click", (ev) => {
  const canvas = $("winding-canvas");
  const half = canvas.width / 2;
  const s = half / 2.4;
  const rect = canvas.getBoundingClientRect();
  const u = (ev.clientX - rect.left - half - half / 2) / s;
  const v = -(ev.clientY - rect.top - canvas.height / 2) / s;
  if (u * u + v * v <= 1.44) {
    target = [u, v];
    drawWinding();
  }
});
$("solve").addEventListener("click", drawFilling);
drawCounts();
drawWinding();
drawFilling();
