# Training loss curves
# Run:  streamlit run streamlit_app.py

import pandas as pd
import plotly.graph_objects as go
import streamlit as st

from reports import load_training_curves, runs_dir

st.set_page_config(page_title="Training Curves", layout="wide")

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
def curves(directory: str) -> pd.DataFrame:
    return load_training_curves(directory)


st.title("Training Curves")
directory = st.text_input("Run directory", value=str(runs_dir()))
frame = curves(directory)

if frame.empty:
    st.info("No training reports yet. Train a model, e.g. `python elhyb.py train-completion`.")
    st.stop()

models = sorted(frame["model"].unique())
chosen = st.multiselect("Models", models, default=models)
log_y = st.checkbox("Log scale", value=False)

fig = go.Figure()
for name in chosen:
    sub = frame[frame["model"] == name]
    fig.add_trace(go.Scatter(x=sub["epoch"], y=sub["loss"], mode="lines+markers", name=name,
                             line=dict(width=2), marker=dict(size=5),
                             hovertemplate="<b>" + name + "</b><br>epoch %{x}: %{y:.4f}<extra></extra>"))
fig.update_layout(
    template="plotly_white",
    height=520,
    margin=dict(l=55, r=35, t=40, b=65),
    legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="left", x=0.0, bgcolor="rgba(0,0,0,0)"),
    hovermode="x unified",
)
fig.update_xaxes(title_text="epoch", dtick=1, showgrid=True, gridcolor="rgba(230,236,245,1)")
fig.update_yaxes(title_text="mean loss", type="log" if log_y else "linear", showgrid=True,
                 gridcolor="rgba(230,236,245,1)")
st.plotly_chart(fig, use_container_width=True)

last = frame.sort_values("epoch").groupby("model").tail(1).set_index("model")
st.dataframe(last.rename(columns={"epoch": "epochs", "loss": "final loss"}), use_container_width=True)
