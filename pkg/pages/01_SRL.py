# SRL grid: original path, completed path and the two selectors
# Run:  streamlit run streamlit_app.py

from pathlib import Path

import pandas as pd
import plotly.graph_objects as go
import streamlit as st

from reports import grid_table, load_report, load_reports, load_selection_log, runs_dir, selection_counts

st.set_page_config(page_title="SRL Grid", layout="wide")

# ---------------------------- Top nav -----------------
cols = st.columns(5)
with cols[0]:
    st.page_link("streamlit_app.py", label="🏠 Home")
with cols[1]:
    st.page_link("pages/01_Completion.py", label="✍️ Completion")
with cols[2]:
    st.page_link("pages/01_DialogAct.py", label="💬 Dialog acts")
with cols[3]:
    st.page_link("pages/01_SRL.py", label="🧩 SRL")
with cols[4]:
    st.page_link("pages/01_Training.py", label="📉 Training")

st.markdown(
    """
<style>
    [data-testid="stSidebarNav"] {display: none;}
    section[data-testid="stSidebar"][aria-expanded="true"]{display: none;}
</style>
""",
    unsafe_allow_html=True,
)

# ---------------------------- CODE -----------------
COLORS = {"EL": "#000000", "CMP": "#1F77B4", "Hybrid-EL-EL": "#7F7F7F", "Hybrid-CMP-CMP": "#9467BD",
          "Hybrid-EL-CMP": "#2CA02C"}


@st.cache_data(ttl=60)
def srl_grid(directory: str) -> pd.DataFrame:
    return grid_table(load_reports(directory), "srl")


st.title("Semantic Role Labeling")
directory = st.text_input("Run directory", value=str(runs_dir()))
table = srl_grid(directory)

if table.empty:
    st.info("No SRL reports yet. Run `python elhyb.py run-grid --task srl --variant all`.")
    st.stop()

table["label"] = table["variant"] + table["selection"].map(lambda s: "" if s in (None, "none") else f" ({s})")
fig = go.Figure()
for _, row in table.iterrows():
    fig.add_trace(go.Bar(x=[row["label"]], y=[row["f1"]], name=row["label"], showlegend=False,
                         marker_color=COLORS.get(row["variant"], "#8C564B"),
                         hovertemplate="<b>%{x}</b><br>F1: %{y:.4f}<extra></extra>"))
fig.update_layout(template="plotly_white", height=440, margin=dict(l=55, r=35, t=40, b=95),
                  yaxis=dict(title="span F1 (modified)", gridcolor="rgba(230,236,245,1)"))
st.plotly_chart(fig, use_container_width=True)
st.dataframe(table.drop(columns="label"), use_container_width=True)

# ---------------------------- Standard vs modified -----------------
st.subheader("Standard vs modified scoring")
st.caption("Standard scoring skips utterances with no predicted argument; modified scoring counts their gold spans as misses")
rows = []
for path in sorted(Path(directory).glob("srl_*.json")):
    metrics = load_report(path).get("metrics", {})
    if "standard" in metrics:
        rows.append({"file": path.name, "standard F1": metrics["standard"].get("f1"),
                     "modified F1": metrics["modified"].get("f1"),
                     "skipped": metrics["standard"].get("extra", {}).get("skipped")})
st.dataframe(pd.DataFrame(rows), use_container_width=True)

# ---------------------------- Decisions -----------------
st.subheader("Selection log")
logs = sorted(Path(directory).glob("srl_Hybrid-EL-CMP_*.selection.jsonl"))
if logs:
    choice = st.selectbox("Log", [p.name for p in logs])
    entries = load_selection_log(Path(directory) / choice)
    st.dataframe(selection_counts(entries), use_container_width=True)
    st.dataframe(entries[["index", "utterance", "completion", "reason"]] if "reason" in entries else entries,
                 use_container_width=True)
else:
    st.caption("No Hybrid-EL-CMP selection logs in this directory.")

tau = load_report(Path(directory) / "tune_tau.json")
if tau:
    st.subheader("Threshold sweep")
    fig_tau = go.Figure(go.Scatter(x=tau["taus"], y=tau["mean_f1"], mode="lines+markers",
                                   line=dict(width=2, color="#2CA02C"), marker=dict(size=5),
                                   hovertemplate="tau %{x:.2f}<br>mean F1: %{y:.4f}<extra></extra>"))
    fig_tau.add_vline(x=tau["best_tau"], line_dash="dash", annotation_text=f"best {tau['best_tau']:.2f}")
    fig_tau.update_layout(template="plotly_white", height=380, margin=dict(l=55, r=35, t=40, b=55),
                          xaxis_title="tau", yaxis_title="mean validation F1")
    st.plotly_chart(fig_tau, use_container_width=True)
