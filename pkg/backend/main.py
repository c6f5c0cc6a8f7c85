from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from datetime import datetime, timezone
import logging
import os

from app.api.analytics import router as analytics_router
from app.api.simulation import router as simulation_router
from app.core.config import settings
from app.core.logging_config import configure_logging

configure_logging()
logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(
    title="rgc-dim API",
    description="Dimension of random Vietoris-Rips and Čech complexes: simulation and closed-form analytics",
    version=settings.tool_version,
)

# CORS middleware (allow a configured frontend origin in addition to localhost)
frontend_origin = os.getenv("FRONTEND_URL") or "http://localhost:3000"
app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000", "http://127.0.0.1:3000", frontend_origin],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(analytics_router)
app.include_router(simulation_router)


@app.get("/")
async def root():
    return {"message": f"{settings.tool_name} API is running!", "status": "healthy"}


@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "version": settings.tool_version,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "service": settings.tool_name,
        "max_http_trials": settings.max_http_trials,
    }


if __name__ == "__main__":
    import uvicorn
    port = int(os.getenv("PORT", 8000))
    logger.info(f"Starting {settings.tool_name} API on port {port}")
    uvicorn.run(app, host="0.0.0.0", port=port)
