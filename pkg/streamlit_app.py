import streamlit as st

st.set_page_config(page_title="elhyb • Experiment Reports", layout="wide", page_icon="EH")

# Hero + card styling
st.markdown("""
    <style>
        [data-testid="stSidebarNav"] {display: none;}
        section[data-testid="stSidebar"][aria-expanded="true"]{display: none;}

        .hero-container {
            background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
            padding: 3rem 2rem;
            border-radius: 20px;
            color: white;
            text-align: center;
            margin: 2rem 0;
            box-shadow: 0 20px 40px rgba(0,0,0,0.1);
        }
        .hero-title {
            font-size: 2.6rem;
            font-weight: 700;
            margin-bottom: 1rem;
            text-shadow: 2px 2px 4px rgba(0,0,0,0.3);
        }
        .hero-subtitle {
            font-size: 1.2rem;
            opacity: 0.9;
            font-weight: 300;
        }

        .project-card {
            background: white;
            border-radius: 20px;
            margin: 1.5rem 0;
            box-shadow: 0 12px 40px rgba(0,0,0,0.1);
            border: 1px solid #e2e8f0;
            overflow: hidden;
        }
        .card-header {
            padding: 1.6rem 2rem 1rem 2rem;
            color: white;
        }
        .card-icon { font-size: 2.4rem; display: block; margin-bottom: .6rem; }
        .card-badge {
            display: inline-block;
            background: rgba(255,255,255,0.2);
            padding: 4px 14px;
            border-radius: 25px;
            font-size: 0.75rem;
            font-weight: 600;
            text-transform: uppercase;
            letter-spacing: 0.8px;
            border: 1px solid rgba(255,255,255,0.3);
        }
        .card-title { font-size: 1.4rem; font-weight: 700; color: white; margin: .6rem 0 0 0; }
        .card-body { padding: 1.2rem 2rem 1.6rem 2rem; color: #334155; line-height: 1.6; }
        .card-tagline { font-weight: 600; color: #475569; margin-bottom: .5rem; }

        .gradient-completion { background: linear-gradient(135deg, #1f77b4 0%, #5fa8e0 100%); }
        .gradient-da { background: linear-gradient(135deg, #d62728 0%, #f07e6e 100%); }
        .gradient-srl { background: linear-gradient(135deg, #2ca02c 0%, #7fd37f 100%); }
        .gradient-training { background: linear-gradient(135deg, #9467bd 0%, #c3a6e0 100%); }

        .footer {
            background: #1e293b;
            color: #e2e8f0;
            padding: 2rem;
            border-radius: 20px;
            margin-top: 3rem;
            text-align: center;
        }
    </style>
""", unsafe_allow_html=True)

st.markdown("""
    <div class="hero-container">
        <div class="hero-title">Ellipsis, Completion &amp; Hybrid Understanding</div>
        <div class="hero-subtitle">
            Reports from the completion model, the dialog-act and SRL baselines,
            and the hybrid selection layer
        </div>
    </div>
""", unsafe_allow_html=True)


def gradient_project_card(title: str, tagline: str, description: str, page_path: str,
                          link_label: str, icon: str, gradient_class: str, badge_text: str):
    card_html = f"""
    <div class="project-card">
        <div class="card-header {gradient_class}">
            <span class="card-icon">{icon}</span>
            <span class="card-badge">{badge_text}</span>
            <h3 class="card-title">{title}</h3>
        </div>
        <div class="card-body">
            <div class="card-tagline">{tagline}</div>
            <div>{description}</div>
        </div>
    </div>
    """
    st.markdown(card_html, unsafe_allow_html=True)
    st.page_link(page_path, label=link_label)


col1, col2 = st.columns(2, gap="large")
with col1:
    gradient_project_card(
        title="Utterance Completion",
        tagline="Seq2seq + copy • BLEU, exact match, word PRF",
        description=(
            "Scores of saved completion evaluations, the copy vs no-copy comparison and the "
            "error categories of each output."
        ),
        page_path="pages/01_Completion.py",
        link_label="🔍 Completion reports",
        icon="✍️",
        gradient_class="gradient-completion",
        badge_text="Seq2Seq",
    )
with col2:
    gradient_project_card(
        title="Dialog Act Prediction",
        tagline="EL • CMP • ensembles • Hybrid-EL-CMP",
        description=(
            "The variant table, the six selection methods side by side, and how often the "
            "expert short-circuit kept the original-utterance decision."
        ),
        page_path="pages/01_DialogAct.py",
        link_label="🔍 Dialog-act grid",
        icon="💬",
        gradient_class="gradient-da",
        badge_text="Multi-label",
    )

col1, col2 = st.columns(2, gap="large")
with col1:
    gradient_project_card(
        title="Semantic Role Labeling",
        tagline="Rule-based and probability-based selection",
        description=(
            "Span F1 of the original and completed paths and of both selectors, with the "
            "per-example decisions behind them."
        ),
        page_path="pages/01_SRL.py",
        link_label="🔍 SRL grid",
        icon="🧩",
        gradient_class="gradient-srl",
        badge_text="BIO tagging",
    )
with col2:
    gradient_project_card(
        title="Training Curves",
        tagline="Per-epoch loss of every trained model",
        description="Loss curves read from the training reports, one line per checkpoint.",
        page_path="pages/01_Training.py",
        link_label="🔍 Training curves",
        icon="📉",
        gradient_class="gradient-training",
        badge_text="Losses",
    )

st.markdown("""
    <div class="footer">
        <p style="margin: 0;">
            Reports are read from the run directory (default <code>runs/</code>, or <code>ELHYB_RUNS_DIR</code>).
            Produce them with <code>python elhyb.py run-grid</code> and <code>python elhyb.py evaluate --output</code>.
        </p>
    </div>
""", unsafe_allow_html=True)
