// SPDX-License-Identifier: Apache-2.0
// Expects the wasm-bindgen `--target web` output in ./pkg (see README).
import init, { Demo } from "./pkg/urbanmesh_demo.js";

const canvas = document.getElementById("map");
const ctx = canvas.getContext("2d");
const status = document.getElementById("status");
const PAD = 20;

let demo = null;
let network = null;
let bounds = null;
let picked = [];
let overlay = () => {};

function computeBounds(fc) {
  const b = { minLat: Infinity, maxLat: -Infinity, minLon: Infinity, maxLon: -Infinity };
  for (const f of fc.features) {
    const coords = f.geometry.type === "Point" ? [f.geometry.coordinates] : f.geometry.coordinates;
    for (const [lon, lat] of coords) {
      b.minLat = Math.min(b.minLat, lat); b.maxLat = Math.max(b.maxLat, lat);
      b.minLon = Math.min(b.minLon, lon); b.maxLon = Math.max(b.maxLon, lon);
    }
  }
  return b;
}

function project([lon, lat]) {
  const w = canvas.width - 2 * PAD, h = canvas.height - 2 * PAD;
  const x = PAD + ((lon - bounds.minLon) / (bounds.maxLon - bounds.minLon || 1)) * w;
  const y = PAD + (1 - (lat - bounds.minLat) / (bounds.maxLat - bounds.minLat || 1)) * h;
  return [x, y];
}

function unproject(x, y) {
  const w = canvas.width - 2 * PAD, h = canvas.height - 2 * PAD;
  const lon = bounds.minLon + ((x - PAD) / w) * (bounds.maxLon - bounds.minLon);
  const lat = bounds.minLat + (1 - (y - PAD) / h) * (bounds.maxLat - bounds.minLat);
  return [lat, lon];
}

function strokeLine(coords, color, width) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  coords.map(project).forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
}

function dot(coord, color, r) {
  const [x, y] = project(coord);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

function redraw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (const f of network.features) {
    if (f.geometry.type === "LineString") strokeLine(f.geometry.coordinates, "#ccc", 1);
  }
  overlay();
}

function parse(text) {
  const v = JSON.parse(text);
  if (v.error) throw new Error(v.error);
  return v;
}

function nodePoint(id) {
  const f = network.features.find((f) => f.geometry.type === "Point" && f.properties.id === id);
  return f && f.geometry.coordinates;
}

function showRoutes(from, to) {
  const fc = parse(demo.compareRoutes(BigInt(from), BigInt(to)));
  const [dist, time] = fc.features;
  overlay = () => {
    strokeLine(dist.geometry.coordinates, "#1f77b4", 5);
    strokeLine(time.geometry.coordinates, "#d62728", 2);
  };
  status.textContent =
    `distance route: ${dist.properties.length_m.toFixed(0)} m, ${dist.properties.travel_time_s.toFixed(0)} s\n` +
    `time route: ${time.properties.length_m.toFixed(0)} m, ${time.properties.travel_time_s.toFixed(0)} s\n` +
    `overlap ${(fc.overlap * 100).toFixed(1)}%`;
}

function heat(t) {
  const r = Math.round(255 * Math.min(1, 2 * t));
  const g = Math.round(255 * Math.min(1, 2 * (1 - t)));
  return `rgb(${r},${g},40)`;
}

function showHeatmap() {
  const metric = document.getElementById("metric").value;
  const fc = parse(demo.heatmap(metric));
  const values = fc.features.map((f) => f.properties.value);
  const lo = Math.min(...values), hi = Math.max(...values);
  overlay = () => {
    for (const f of fc.features) {
      const t = hi > lo ? (f.properties.value - lo) / (hi - lo) : 0;
      strokeLine(f.geometry.coordinates, heat(t), 1 + 4 * t);
    }
  };
  status.textContent = `${metric} (edge, line graph)\nmin ${lo.toPrecision(4)}  max ${hi.toPrecision(4)}`;
}

function showCommunities() {
  const gamma = 10 ** Number(document.getElementById("gamma").value);
  const seed = BigInt(document.getElementById("seed").value || 0);
  document.getElementById("gamma-value").textContent = gamma.toPrecision(3);
  const fc = parse(demo.communities(gamma, seed));
  overlay = () => {
    for (const f of fc.features) {
      const hue = (f.properties.community * 137.508) % 360;
      dot(f.geometry.coordinates, `hsl(${hue},70%,45%)`, 4);
    }
  };
  status.textContent = `gamma ${gamma.toPrecision(3)}: ${fc.community_count} communities\nQ = ${fc.modularity.toFixed(5)}`;
}

function guarded(fn) {
  return (...args) => {
    try {
      fn(...args);
    } catch (e) {
      overlay = () => {};
      status.textContent = `error: ${e.message ?? e}`;
    }
    redraw();
  };
}

function rebuild() {
  const side = Number(document.getElementById("side").value);
  if (demo) demo.free();
  demo = new Demo(side);
  network = JSON.parse(demo.network());
  bounds = computeBounds(network);
  picked = [];
  overlay = () => {};
  status.textContent = `${side} x ${side} grid ready`;
}

canvas.addEventListener("click", guarded((ev) => {
  const rect = canvas.getBoundingClientRect();
  const [lat, lon] = unproject(ev.clientX - rect.left, ev.clientY - rect.top);
  const { node } = parse(demo.nearest(lat, lon));
  picked = picked.length === 2 ? [node] : [...picked, node];
  if (picked.length === 2) {
    showRoutes(picked[0], picked[1]);
  } else {
    const p = nodePoint(node);
    overlay = () => p && dot(p, "#000", 5);
    status.textContent = `from node ${node}; click a destination`;
  }
}));
document.getElementById("rebuild").addEventListener("click", guarded(rebuild));
document.getElementById("heatmap").addEventListener("click", guarded(showHeatmap));
document.getElementById("gamma").addEventListener("input", guarded(showCommunities));
document.getElementById("seed").addEventListener("change", guarded(showCommunities));

await init();
guarded(rebuild)();
