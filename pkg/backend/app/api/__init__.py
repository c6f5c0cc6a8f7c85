# API package initialization
