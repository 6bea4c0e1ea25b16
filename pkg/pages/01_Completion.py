# Utterance completion reports
# Run:  streamlit run streamlit_app.py

import pandas as pd
import plotly.graph_objects as go
import streamlit as st

from reports import load_report, load_reports, runs_dir

st.set_page_config(page_title="Completion Reports", layout="wide")

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
METRICS = {"bleu": "BLEU", "em": "Exact match", "f1": "Word F1"}
COLORS = ["#1F77B4", "#D62728", "#2CA02C"]


@st.cache_data(ttl=60)
def completion_reports(directory: str) -> pd.DataFrame:
    frame = load_reports(directory)
    return frame[frame["task"] == "completion"].reset_index(drop=True)


st.title("Utterance Completion")
directory = st.text_input("Run directory", value=str(runs_dir()))
frame = completion_reports(directory)

if frame.empty:
    st.info("No completion reports yet. Save one with "
            "`python elhyb.py evaluate --task completion ... --per-example --output runs/<name>.json`.")
    st.stop()

st.caption("One bar group per saved evaluation; name the files after the model (e.g. copy.json, nocopy.json)")
fig = go.Figure()
for (key, label), color in zip(METRICS.items(), COLORS):
    fig.add_trace(go.Bar(x=frame["variant"], y=frame[key], name=label, marker_color=color,
                         hovertemplate="<b>%{x}</b><br>" + label + ": %{y:.4f}<extra></extra>"))
fig.update_layout(
    barmode="group",
    template="plotly_white",
    height=460,
    margin=dict(l=55, r=35, t=40, b=65),
    legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="left", x=0.0),
    yaxis=dict(range=[0, 1], tickformat=".0%", gridcolor="rgba(230,236,245,1)"),
)
st.plotly_chart(fig, use_container_width=True)

st.dataframe(frame[["variant", "bleu", "em", "precision", "recall", "f1", "corpus_hash"]],
             use_container_width=True)

# ---------------------------- Error analysis -----------------
st.subheader("Error categories")
choice = st.selectbox("Report", frame["file"].tolist())
report = load_report(f"{directory}/{choice}")
categories = report.get("extra", {}).get("categories")
if categories:
    cat = pd.DataFrame({"category": list(categories), "count": list(categories.values())})
    st.plotly_chart(
        go.Figure(go.Bar(x=cat["category"], y=cat["count"], marker_color="#9467BD"))
        .update_layout(template="plotly_white", height=360, margin=dict(l=55, r=35, t=30, b=55)),
        use_container_width=True,
    )
else:
    st.caption("This report has no categories; evaluate with a completion gold corpus to get them.")
if report.get("per_example"):
    per = pd.DataFrame(report["per_example"])
    wanted = st.multiselect("Show categories", sorted(per["category"].unique()),
                            default=[c for c in sorted(per["category"].unique()) if c != "exact"])
    st.dataframe(per[per["category"].isin(wanted)], use_container_width=True)
