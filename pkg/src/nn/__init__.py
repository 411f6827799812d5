"""Dense-network substrate: tensors, layers, losses, optimizers."""
