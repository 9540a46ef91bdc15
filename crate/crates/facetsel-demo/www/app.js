import init, { compile_chronicle, run_selection, run_ratio_experiment } from "./pkg/facetsel_demo.js";

const EXAMPLE_CHRONICLE = {
  facets: [
    { id: "f1", label: "prefers LinkedIn" },
    { id: "f2", label: "prefers Twitter for professional updates" },
    { id: "f3", label: "prefers ResearchGate" },
    { id: "f4", label: "engages in thought-leadership posts" },
    { id: "f5", label: "wants direct messaging" },
    { id: "f6", label: "avoids public discussions" },
    { id: "f7", label: "goal: connect with academics" }
  ],
  edges: [
    ["f1", "f4"], ["f4", "f1"],
    ["f3", "f7"], ["f7", "f3"],
    ["f2", "f6"], ["f5", "f1"]
  ]
};

const EXAMPLE_CONSTRAINTS = {
  constraints: [
    { name: "A1", members: ["scc:f1", "scc:f2", "scc:f3", "scc:f5", "scc:f6"], quota: 3 },
    { name: "A2", members: ["scc:f1", "scc:f2", "scc:f3", "scc:f5"], quota: 3 },
    { name: "A3", members: ["scc:f2", "scc:f5"], quota: 1 }
  ]
};

const EXAMPLE_UTILITY = {
  kind: "modular",
  weights: { f1: 1.0, f2: 1.0, f3: 1.0, f4: 1.0, f5: 1.0, f6: 1.0, f7: 1.0 }
};

const $ = (id) => document.getElementById(id);
let compiled = null;

function showError(err) {
  $("error-box").textContent = err ? `error: ${err}` : "";
}

function renderCompiled(msetJson) {
  const mset = JSON.parse(msetJson);
  const view = $("compile-view");
  const units = mset.macro_facets
    .map((m) => `<tr><td>${m.id}</td><td>${m.members.join(", ")}</td><td>${m.closure.join(", ")}</td><td>${m.cost}</td></tr>`)
    .join("");
  const edges = mset.condensation_edges.length
    ? mset.condensation_edges.map(([a, b]) => `${a} &rarr; ${b}`).join("<br>")
    : "(none)";
  view.innerHTML = `
    <table>
      <tr><th>macro-facet</th><th>members</th><th>closure</th><th>cost</th></tr>
      ${units}
    </table>
    <p class="summary">condensation edges:</p>
    <div class="edge-list">${edges}</div>`;
}

function renderTrace(result) {
  const view = $("trace-view");
  if (!result.trace) { view.innerHTML = ""; return; }
  const rows = result.trace.iterations.map((it) => {
    const cls = it.accepted ? "accepted" : (it.verdict ? "rejected" : "stopped");
    const verdict = it.accepted
      ? "accepted"
      : it.verdict
        ? `quota hit at ${it.verdict.node}`
        : "no positive gain — stop";
    return `<tr class="${cls}"><td>${it.candidate}</td><td>${it.gain}</td><td>${verdict}</td><td>${it.remaining_candidates}</td></tr>`;
  }).join("");
  view.innerHTML = `
    <table>
      <tr><th>candidate</th><th>marginal gain</th><th>outcome</th><th>candidates left</th></tr>
      ${rows}
    </table>`;
}

function drawHistogram(report) {
  const canvas = $("sim-canvas");
  const ctx = canvas.getContext("2d");
  const { edges, counts } = report.histogram;
  const W = canvas.width, H = canvas.height;
  const padL = 50, padB = 30, padT = 12, padR = 12;
  ctx.clearRect(0, 0, W, H);
  const maxCount = Math.max(...counts, 1);
  const plotW = W - padL - padR, plotH = H - padT - padB;
  const x = (ratio) => padL + ((ratio - 0.5) / 0.5) * plotW;

  ctx.fillStyle = "#4a79b8";
  counts.forEach((c, i) => {
    if (c === 0) return;
    const x0 = x(edges[i]);
    const x1 = x(edges[i + 1]);
    const h = (c / maxCount) * plotH;
    ctx.fillRect(x0, padT + plotH - h, Math.max(x1 - x0 - 1, 1), h);
  });

  // axes
  ctx.strokeStyle = "#1c2530";
  ctx.beginPath();
  ctx.moveTo(padL, padT); ctx.lineTo(padL, padT + plotH); ctx.lineTo(W - padR, padT + plotH);
  ctx.stroke();
  ctx.fillStyle = "#1c2530";
  ctx.font = "12px system-ui";
  for (let r = 0.5; r <= 1.001; r += 0.1) {
    ctx.fillText(r.toFixed(1), x(r) - 8, padT + plotH + 16);
  }
  ctx.fillText(String(maxCount), 8, padT + 10);
  ctx.fillText("0", 8, padT + plotH);

  // the 1/2 guarantee
  ctx.strokeStyle = "#b3261e";
  ctx.setLineDash([6, 4]);
  ctx.beginPath();
  ctx.moveTo(x(0.5), padT); ctx.lineTo(x(0.5), padT + plotH);
  ctx.stroke();
  ctx.setLineDash([]);
}

async function main() {
  await init();

  $("chronicle-input").value = JSON.stringify(EXAMPLE_CHRONICLE, null, 2);
  $("constraints-input").value = JSON.stringify(EXAMPLE_CONSTRAINTS, null, 2);
  $("utility-input").value = JSON.stringify(EXAMPLE_UTILITY, null, 2);

  $("compile-btn").onclick = () => {
    showError("");
    try {
      compiled = compile_chronicle($("chronicle-input").value);
      $("compile-output").textContent = compiled;
      renderCompiled(compiled);
    } catch (err) {
      showError(err);
    }
  };

  $("select-btn").onclick = () => {
    showError("");
    if (!compiled) { $("compile-btn").onclick(); }
    if (!compiled) return;
    try {
      const algo = $("algo-select").value;
      const out = run_selection(compiled, $("constraints-input").value, $("utility-input").value, algo);
      $("select-output").textContent = out;
      const parsed = JSON.parse(out);
      if (algo === "compare") {
        $("select-summary").textContent =
          `greedy ${parsed.greedy.value} vs optimal ${parsed.optimal.value} — ratio ${parsed.ratio.toFixed(4)}`;
        renderTrace(parsed.greedy);
      } else {
        $("select-summary").textContent =
          `${parsed.algorithm}: chose [${parsed.chosen.join(", ")}], value ${parsed.value}, disclosed facets [${(parsed.expansion || []).join(", ")}], cost ${parsed.cost}`;
        renderTrace(parsed);
      }
    } catch (err) {
      showError(err);
    }
  };

  $("sim-btn").onclick = () => {
    showError("");
    try {
      const report = JSON.parse(run_ratio_experiment(
        Number($("sim-trials").value),
        Number($("sim-macro").value),
        Number($("sim-universe").value),
        Number($("sim-groups").value),
        Number($("sim-seed").value)
      ));
      $("sim-summary").textContent =
        `mean ${report.mean_ratio.toFixed(4)} · min ${report.min_ratio.toFixed(4)} · 5th percentile ${report.percentile_5.toFixed(4)} · ${report.trials} trials`;
      drawHistogram(report);
    } catch (err) {
      showError(err);
    }
  };
}

main();
