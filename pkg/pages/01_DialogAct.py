# Dialog-act grid: baselines, ensembles and the six selection methods
# Run:  streamlit run streamlit_app.py

from pathlib import Path

import pandas as pd
import plotly.graph_objects as go
import streamlit as st

from reports import grid_table, load_reports, load_selection_log, runs_dir, selection_counts

st.set_page_config(page_title="Dialog Act Grid", layout="wide")

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
@st.cache_data(ttl=60)
def da_grid(directory: str) -> pd.DataFrame:
    return grid_table(load_reports(directory), "da")


st.title("Dialog Act Prediction")
directory = st.text_input("Run directory", value=str(runs_dir()))
table = da_grid(directory)

if table.empty:
    st.info("No dialog-act reports yet. Run `python elhyb.py run-grid --task da --variant all`.")
    st.stop()

best = table.iloc[0]
baseline = table[table["variant"].isin(["EL", "CMP"])]["f1"].max()
c1, c2, c3 = st.columns(3)
c1.metric("Best variant", f"{best['variant']} ({best['selection']})")
c2.metric("Best F1", f"{best['f1']:.4f}",
          delta=f"{best['f1'] - baseline:+.4f} vs best single path" if pd.notna(baseline) else None)
c3.metric("Reports", len(table))

st.dataframe(table.style.format({"precision": "{:.4f}", "recall": "{:.4f}", "f1": "{:.4f}"}),
             use_container_width=True)

# ---------------------------- Selection methods -----------------
st.subheader("Selection methods (Hybrid-EL-CMP)")
hybrid = table[table["variant"] == "Hybrid-EL-CMP"].sort_values("selection")
if hybrid.empty:
    st.caption("No Hybrid-EL-CMP reports in this directory.")
else:
    fig = go.Figure()
    fig.add_trace(go.Bar(x=hybrid["selection"], y=hybrid["f1"], marker_color="#D62728",
                         hovertemplate="<b>%{x}</b><br>F1: %{y:.4f}<extra></extra>", name="F1"))
    for name, color in (("EL", "#000000"), ("CMP", "#1F77B4")):
        row = table[table["variant"] == name]
        if not row.empty:
            fig.add_hline(y=float(row["f1"].iloc[0]), line_dash="dash", line_color=color,
                          annotation_text=name, annotation_position="top left")
    fig.update_layout(template="plotly_white", height=440, margin=dict(l=55, r=35, t=40, b=65),
                      yaxis=dict(title="micro F1", gridcolor="rgba(230,236,245,1)"))
    st.plotly_chart(fig, use_container_width=True)

# ---------------------------- Decisions -----------------
st.subheader("Selection log")
logs = sorted(Path(directory).glob("da_Hybrid-EL-CMP_*.selection.jsonl"))
if logs:
    choice = st.selectbox("Log", [p.name for p in logs])
    entries = load_selection_log(Path(directory) / choice)
    counts = selection_counts(entries)
    st.caption("How often the expert short-circuit kept the original-utterance labels")
    st.dataframe(counts, use_container_width=True)
    if "reason" in entries:
        reason = st.radio("Show", ["all"] + counts["reason"].tolist(), horizontal=True)
        shown = entries if reason == "all" else entries[entries["reason"] == reason]
        st.dataframe(shown, use_container_width=True)
else:
    st.caption("No Hybrid-EL-CMP selection logs in this directory.")
