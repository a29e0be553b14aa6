"""Fit the linear foreground-speech head on a toy dataset.

Two well-separated clusters stand in for wearer speech and other speech.
Training is full-batch gradient descent, so the loss curve is smooth and the
same seed always gives the same weights.
"""

from convodetect.fsd import TrainingHyper, evaluate_balanced_accuracy, separable_fixture, train_linear

x, y = separable_fixture(n_per_class=200, dim=8, seed=1)
for lr in (0.01, 0.1, 1.0):
    loss = []
    model = train_linear((x, y), TrainingHyper(learning_rate=lr, epochs=300, seed=0), loss_history=loss)
    checkpoints = "  ".join(f"{loss[k]:.3f}" for k in (0, 10, 100, 300))
    acc = evaluate_balanced_accuracy(model, (x, y))
    print(f"lr {lr:<5} loss at epochs 0/10/100/300: {checkpoints}   balanced accuracy {acc:.2f}%")

again = train_linear((x, y), TrainingHyper(learning_rate=1.0, epochs=300, seed=0))
print("retrain identical:", again == model)
