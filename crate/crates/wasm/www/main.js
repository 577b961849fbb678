// Build with: wasm-pack build crates/wasm --target web --out-dir www/pkg
import init, { plan_demo, perturb_demo, refine_demo } from "./pkg/presgauge_wasm.js";

const $ = (id) => document.getElementById(id);
let planned = null;
let poor = null;

function card(title, svg, meta) {
  const div = document.createElement("div");
  div.className = "card";
  div.innerHTML = `<strong>${title}</strong>${svg}<div class="meta"></div>`;
  div.querySelector(".meta").textContent = meta;
  return div;
}

function guard(fn) {
  return () => {
    $("error").textContent = "";
    try {
      fn();
    } catch (e) {
      $("error").textContent = String(e);
    }
  };
}

$("plan").onclick = guard(() => {
  const v = JSON.parse(plan_demo($("manifest").value, 16 / 9));
  planned = v.slide;
  $("planned").replaceChildren(card("planned", v.svg, `score ${v.score.toFixed(2)}  balance ${v.balance.toFixed(3)}\n${v.feedback}`));
  $("perturb").disabled = false;
});

$("perturb").onclick = guard(() => {
  const v = JSON.parse(perturb_demo(JSON.stringify(planned), Number($("seed").value)));
  $("variants").replaceChildren(
    ...v.variants.map((x) =>
      card(x.tier, x.svg, `score ${x.score.toFixed(2)}\nlabels ${x.labels.join(", ")}\n${x.applied.join("\n")}`),
    ),
  );
  poor = v.variants[0].slide;
  $("refine").disabled = false;
});

$("refine").onclick = guard(() => {
  const r = JSON.parse(refine_demo(JSON.stringify(poor), Number($("iters").value), Number($("threshold").value)));
  $("steps").replaceChildren(
    ...r.steps.map((s) =>
      card(
        `t=${s.t}${s.t === r.best_index ? " (returned)" : ""}`,
        s.svg,
        `score ${s.score.toFixed(2)}${s.reverted ? "  reverted" : ""}\n${s.feedback ?? ""}`,
      ),
    ),
  );
});

await init();
