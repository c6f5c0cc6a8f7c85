# Core package initialization 