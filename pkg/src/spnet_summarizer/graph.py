"""Convert, train and evaluate pipeline."""

from langgraph.graph import END, START, StateGraph

from spnet_summarizer.configuration import Configuration
from spnet_summarizer.nodes import evaluate_summarizer, prepare_corpus, train_summarizer
from spnet_summarizer.routers import route_prepared_corpus
from spnet_summarizer.state import InputState, State

# Define a new graph
builder = StateGraph(State, input=InputState, config_schema=Configuration)

# Add nodes
builder.add_node("prepare_corpus", prepare_corpus)
builder.add_node("train_summarizer", train_summarizer)
builder.add_node("evaluate_summarizer", evaluate_summarizer)

# Define the flow
builder.add_edge(START, "prepare_corpus")

# training is skipped when a checkpoint can be reused
builder.add_conditional_edges(
    "prepare_corpus",
    route_prepared_corpus,
)
builder.add_edge("train_summarizer", "evaluate_summarizer")
builder.add_edge("evaluate_summarizer", END)


# Compile the builder into an executable graph
graph = builder.compile(name="SPNet Summarization Pipeline")
