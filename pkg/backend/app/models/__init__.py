# Models package initialization 